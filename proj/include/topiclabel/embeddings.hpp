#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topiclabel {

/// Splits text into lowercase tokens: whitespace separated, with leading
/// and trailing ASCII punctuation stripped. Tokens that are all
/// punctuation are dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Lowercases ASCII characters in place; non-ASCII bytes pass through.
std::string normalize_token(std::string_view token);

/// Immutable token -> vector map loaded from a textual word-vector file.
/// Tokens are case-normalized at load and lookup. Safe for concurrent
/// reads once loaded.
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {}

    /// Reads `token v1 ... vd` lines. An optional first line of the form
    /// `vocab_size dimension` is detected and skipped. Duplicate tokens
    /// keep the last occurrence; the number of duplicates is reported via
    /// duplicate_count().
    static EmbeddingTable load(const std::string& path, std::size_t expected_dimension);

    std::size_t dimension() const { return dim_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t duplicate_count() const { return duplicates_; }

    /// Returns the stored vector or nullptr for out-of-vocabulary tokens.
    const std::vector<double>* lookup(std::string_view token) const;

    bool contains(std::string_view token) const { return lookup(token) != nullptr; }

    /// Inserts or replaces an entry. Used to build tables in memory.
    void insert(std::string_view token, std::vector<double> vector);

    struct PoolResult {
        std::vector<double> mean;   // all zeros when found == 0
        std::size_t found = 0;      // in-vocabulary token count
    };

    /// Component-wise mean over the vectors of in-vocabulary tokens.
    /// Out-of-vocabulary tokens are skipped; if none are known the mean
    /// is the zero vector. Throws ArgumentError on an empty sequence.
    PoolResult mean_pool(std::span<const std::string> tokens) const;

private:
    std::size_t dim_ = 0;
    std::size_t duplicates_ = 0;
    std::unordered_map<std::string, std::vector<double>> entries_;
};

}  // namespace topiclabel
