#include "topiclabel/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <utility>

#include "topiclabel/error.hpp"

namespace topiclabel {

namespace {

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

// Splits on runs of whitespace without copying.
std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        std::size_t start = i;
        while (i < line.size() && !is_space(line[i])) ++i;
        if (i > start) fields.push_back(line.substr(start, i - start));
    }
    return fields;
}

bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

bool parse_count(std::string_view field, std::size_t& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace

std::string normalize_token(std::string_view token) {
    std::string out(token);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    for (std::string_view field : split_fields(text)) {
        std::size_t begin = 0;
        std::size_t end = field.size();
        while (begin < end && std::ispunct(static_cast<unsigned char>(field[begin]))) ++begin;
        while (end > begin && std::ispunct(static_cast<unsigned char>(field[end - 1]))) --end;
        if (end > begin) tokens.push_back(normalize_token(field.substr(begin, end - begin)));
    }
    return tokens;
}

EmbeddingTable EmbeddingTable::load(const std::string& path, std::size_t expected_dimension) {
    if (expected_dimension == 0) {
        throw ArgumentError("expected_dimension must be positive");
    }
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open embeddings file: " + path);
    }

    EmbeddingTable table(expected_dimension);
    std::string line;
    std::size_t line_no = 0;
    bool first_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        auto fields = split_fields(line);
        if (fields.empty()) continue;
        if (first_line) {
            first_line = false;
            // Header form: `vocab_size dimension`, both integral.
            std::size_t a = 0, b = 0;
            if (fields.size() == 2 && parse_count(fields[0], a) && parse_count(fields[1], b)) {
                if (b != expected_dimension) {
                    throw DimensionError("embeddings file header declares dimension " +
                                         std::to_string(b) + ", expected " +
                                         std::to_string(expected_dimension));
                }
                continue;
            }
        }
        if (fields.size() != expected_dimension + 1) {
            if (fields.size() < 2) {
                throw ParseError("malformed embeddings line " + std::to_string(line_no) +
                                 ": expected `token v1 ... vd`");
            }
            throw DimensionError("token '" + std::string(fields[0]) + "' on line " +
                                 std::to_string(line_no) + " has " +
                                 std::to_string(fields.size() - 1) + " components, expected " +
                                 std::to_string(expected_dimension));
        }
        std::vector<double> vec(expected_dimension);
        for (std::size_t i = 0; i < expected_dimension; ++i) {
            if (!parse_double(fields[i + 1], vec[i])) {
                throw ParseError("malformed embeddings line " + std::to_string(line_no) +
                                 ": bad number '" + std::string(fields[i + 1]) + "'");
            }
        }
        table.insert(fields[0], std::move(vec));
    }
    return table;
}

const std::vector<double>* EmbeddingTable::lookup(std::string_view token) const {
    auto it = entries_.find(normalize_token(token));
    if (it == entries_.end()) return nullptr;
    return &it->second;
}

void EmbeddingTable::insert(std::string_view token, std::vector<double> vector) {
    if (dim_ == 0) dim_ = vector.size();
    if (vector.size() != dim_) {
        throw DimensionError("vector for token '" + std::string(token) + "' has " +
                             std::to_string(vector.size()) + " components, expected " +
                             std::to_string(dim_));
    }
    auto [it, inserted] = entries_.insert_or_assign(normalize_token(token), std::move(vector));
    (void)it;
    if (!inserted) ++duplicates_;
}

EmbeddingTable::PoolResult EmbeddingTable::mean_pool(std::span<const std::string> tokens) const {
    if (tokens.empty()) {
        throw ArgumentError("mean_pool requires a non-empty token sequence");
    }
    // Summation in canonical token order keeps the result bit-identical
    // under permutations of the input sequence.
    std::vector<std::pair<std::string, const std::vector<double>*>> found;
    found.reserve(tokens.size());
    for (const std::string& token : tokens) {
        std::string normalized = normalize_token(token);
        auto it = entries_.find(normalized);
        if (it != entries_.end()) found.emplace_back(std::move(normalized), &it->second);
    }
    std::sort(found.begin(), found.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    PoolResult result;
    result.mean.assign(dim_, 0.0);
    result.found = found.size();
    for (const auto& [token, vec] : found) {
        for (std::size_t i = 0; i < dim_; ++i) result.mean[i] += (*vec)[i];
    }
    if (result.found > 0) {
        const double inv = 1.0 / static_cast<double>(result.found);
        for (double& v : result.mean) v *= inv;
    }
    return result;
}

bool is_input_error(const Error& e) {
    return dynamic_cast<const PoolExhaustedError*>(&e) == nullptr &&
           dynamic_cast<const NumericError*>(&e) == nullptr;
}

}  // namespace topiclabel
