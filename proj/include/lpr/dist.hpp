#ifndef LPR_DIST_HPP
#define LPR_DIST_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace lpr {

using ItemId = std::uint32_t;

/*
 * Deterministic pseudo-random source. Wraps mt19937_64 (whose output
 * sequence is mandated by the standard, so identical seeds reproduce
 * identical streams on every platform) and derives uniform doubles
 * from the raw 64-bit output directly, avoiding the
 * implementation-defined std::uniform_real_distribution.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit();

    // Uniform integer in [0, n); n > 0.
    std::uint64_t next_below(std::uint64_t n);

    // Independent stream for parallel / repeated runs: documented
    // derivation is seed XOR (golden-ratio constant * (index + 1)).
    Rng substream(std::uint64_t index) const;

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

/*
 * The stack-depth law s(1..V) with cached prefix sums
 * S(j) = s(1) + ... + s(j).  Immutable after construction.
 */
class StackDistribution {
public:
    // Empty placeholder (V = 0); usable only after assignment.
    StackDistribution() = default;

    // Validates and builds. Trailing zero entries are removed (the
    // deepest position must have positive probability); interior
    // zeros are kept. With normalize=true the entries are rescaled
    // to sum to one; otherwise the sum must be within 1e-9 of 1.
    static StackDistribution from_probabilities(std::vector<double> raw,
                                                bool normalize = false);

    std::size_t space_size() const { return s_.size(); }          // V
    double s(std::size_t depth) const { return s_[depth - 1]; }   // 1-based
    double S(std::size_t depth) const;                            // S(0)=0
    // Moving average s̄(i,j) = (s(i)+...+s(j)) / (j-i+1), 1 <= i <= j <= V.
    double mean_range(std::size_t i, std::size_t j) const;

    const std::vector<double>& probabilities() const { return s_; }

private:
    std::vector<double> s_;
    std::vector<double> cum_;
};

/*
 * LRU stack: permutation of item ids, position 1 = most recent.
 * Processing an access at depth d applies a downward unit cyclic
 * shift of the prefix of length d.
 */
class LruStack {
public:
    LruStack() = default;
    // Identity stack [0, 1, ..., v-1].
    static LruStack identity(std::size_t v);
    explicit LruStack(std::vector<ItemId> items);

    std::size_t size() const { return items_.size(); }
    ItemId at(std::size_t depth) const { return items_[depth - 1]; }
    // 1-based depth, or 0 when the item is absent.
    std::size_t depth_of(ItemId item) const;
    bool contains(ItemId item) const { return depth_of(item) != 0; }

    // Access an item already in the stack: returns its depth before
    // the update and rotates the prefix so the item is on top.
    std::size_t touch(ItemId item);

    // Insert a new item on top (everything else moves down one).
    void push_new(ItemId item);

    const std::vector<ItemId>& items() const { return items_; }

private:
    std::vector<ItemId> items_;
    std::vector<std::size_t> pos_;  // item -> 1-based position, 0 = absent
};

struct Trace {
    std::vector<ItemId> accesses;
    std::size_t size() const { return accesses.size(); }
};

// Inverse-CDF sample: depth j with probability s(j).
std::size_t sample_depth(const StackDistribution& dist, Rng& rng);

// Generate n accesses by sampling depths and rotating the stack.
Trace generate_trace(const StackDistribution& dist, LruStack stack,
                     std::size_t n, Rng& rng);

// Replay a trace, returning the LRU depth of every access.
std::vector<std::size_t> depths_from_trace(const Trace& trace, LruStack stack);

// --- file I/O ----------------------------------------------------------
// Distribution file: one probability per line, '#' starts a comment.
StackDistribution load_distribution(const std::string& path,
                                    bool normalize = false);

// Text trace: one item id per line.
Trace load_trace_text(const std::string& path);
void save_trace_text(const Trace& trace, const std::string& path);

// Binary trace: "LPRT", u32 LE version (=1), u64 LE count, u32 LE ids.
Trace load_trace_binary(const std::string& path);
void save_trace_binary(const Trace& trace, const std::string& path);

// Writes content to path atomically (temp file + rename).
void atomic_write_file(const std::string& path, const std::string& content);

}  // namespace lpr

#endif
