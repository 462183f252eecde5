#include "lpr/dist.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lpr {

namespace {
constexpr double kSumTolerance = 1e-9;
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
}  // namespace

// --- Rng ---------------------------------------------------------------

Rng::Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

std::uint64_t Rng::next_u64() { return gen_(); }

double Rng::next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be positive");
    // Rejection sampling for exact uniformity.
    std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
    std::uint64_t x;
    do {
        x = gen_();
    } while (x >= limit);
    return x % n;
}

Rng Rng::substream(std::uint64_t index) const {
    return Rng(seed_ ^ (kGolden * (index + 1)));
}

// --- StackDistribution -------------------------------------------------

StackDistribution StackDistribution::from_probabilities(std::vector<double> raw,
                                                        bool normalize) {
    if (raw.empty())
        throw std::invalid_argument("distribution: empty input");
    double sum = 0.0;
    for (double p : raw) {
        if (!(p >= 0.0))
            throw std::invalid_argument("distribution: negative entry");
        sum += p;
    }
    if (sum <= 0.0)
        throw std::invalid_argument("distribution: all entries zero");
    if (normalize) {
        for (double& p : raw) p /= sum;
    } else if (std::abs(sum - 1.0) > kSumTolerance) {
        throw std::invalid_argument(
            "distribution: probabilities sum to " + std::to_string(sum) +
            ", expected 1 (use normalize to rescale)");
    }
    while (!raw.empty() && raw.back() == 0.0) raw.pop_back();
    StackDistribution d;
    d.s_ = std::move(raw);
    d.cum_.resize(d.s_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < d.s_.size(); ++i) {
        acc += d.s_[i];
        d.cum_[i] = acc;
    }
    return d;
}

double StackDistribution::S(std::size_t depth) const {
    if (depth == 0) return 0.0;
    return cum_[depth - 1];
}

double StackDistribution::mean_range(std::size_t i, std::size_t j) const {
    return (S(j) - S(i - 1)) / static_cast<double>(j - i + 1);
}

// --- LruStack ----------------------------------------------------------

LruStack LruStack::identity(std::size_t v) {
    std::vector<ItemId> items(v);
    for (std::size_t i = 0; i < v; ++i) items[i] = static_cast<ItemId>(i);
    return LruStack(std::move(items));
}

LruStack::LruStack(std::vector<ItemId> items) : items_(std::move(items)) {
    for (std::size_t i = 0; i < items_.size(); ++i) {
        ItemId it = items_[i];
        if (it >= pos_.size()) pos_.resize(it + 1, 0);
        if (pos_[it] != 0)
            throw std::invalid_argument("LruStack: duplicate item id");
        pos_[it] = i + 1;
    }
}

std::size_t LruStack::depth_of(ItemId item) const {
    if (item >= pos_.size()) return 0;
    return pos_[item];
}

std::size_t LruStack::touch(ItemId item) {
    std::size_t d = depth_of(item);
    if (d == 0)
        throw std::invalid_argument("LruStack: unknown item id");
    for (std::size_t p = d; p > 1; --p) {
        items_[p - 1] = items_[p - 2];
        pos_[items_[p - 1]] = p;
    }
    items_[0] = item;
    pos_[item] = 1;
    return d;
}

void LruStack::push_new(ItemId item) {
    if (depth_of(item) != 0)
        throw std::invalid_argument("LruStack: item already present");
    items_.push_back(items_.empty() ? item : items_.back());
    for (std::size_t p = items_.size(); p > 1; --p) {
        items_[p - 1] = items_[p - 2];
        pos_[items_[p - 1]] = p;
    }
    items_[0] = item;
    if (item >= pos_.size()) pos_.resize(item + 1, 0);
    pos_[item] = 1;
}

// --- sampling ----------------------------------------------------------

std::size_t sample_depth(const StackDistribution& dist, Rng& rng) {
    double u = rng.next_unit();
    // Smallest j with u < S(j). Interior zero-probability depths have
    // empty intervals and are never selected.
    std::size_t lo = 1, hi = dist.space_size();
    while (lo < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (u < dist.S(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

Trace generate_trace(const StackDistribution& dist, LruStack stack,
                     std::size_t n, Rng& rng) {
    if (stack.size() != dist.space_size())
        throw std::invalid_argument("generate_trace: stack size != V");
    Trace t;
    t.accesses.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t d = sample_depth(dist, rng);
        ItemId item = stack.at(d);
        stack.touch(item);
        t.accesses.push_back(item);
    }
    return t;
}

std::vector<std::size_t> depths_from_trace(const Trace& trace, LruStack stack) {
    std::vector<std::size_t> depths;
    depths.reserve(trace.size());
    for (ItemId item : trace.accesses) depths.push_back(stack.touch(item));
    return depths;
}

// --- file I/O ----------------------------------------------------------

StackDistribution load_distribution(const std::string& path, bool normalize) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open distribution file: " + path);
    std::vector<double> raw;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double p;
        while (ls >> p) raw.push_back(p);
    }
    return StackDistribution::from_probabilities(std::move(raw), normalize);
}

Trace load_trace_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open trace file: " + path);
    Trace t;
    std::uint64_t id;
    while (in >> id) t.accesses.push_back(static_cast<ItemId>(id));
    return t;
}

void save_trace_text(const Trace& trace, const std::string& path) {
    std::string out;
    for (ItemId id : trace.accesses) {
        out += std::to_string(id);
        out += '\n';
    }
    atomic_write_file(path, out);
}

namespace {
void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}
void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out += static_cast<char>((v >> (8 * i)) & 0xff);
}
std::uint64_t get_le(const std::string& in, std::size_t off, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i)
        v |= static_cast<std::uint64_t>(
                 static_cast<unsigned char>(in[off + i]))
             << (8 * i);
    return v;
}
}  // namespace

Trace load_trace_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open trace file: " + path);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (data.size() < 16 || data.compare(0, 4, "LPRT") != 0)
        throw std::runtime_error("bad binary trace header: " + path);
    std::uint32_t version = static_cast<std::uint32_t>(get_le(data, 4, 4));
    if (version != 1)
        throw std::runtime_error("unsupported trace version");
    std::uint64_t count = get_le(data, 8, 8);
    if (data.size() != 16 + 4 * count)
        throw std::runtime_error("binary trace truncated: " + path);
    Trace t;
    t.accesses.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        t.accesses.push_back(
            static_cast<ItemId>(get_le(data, 16 + 4 * i, 4)));
    return t;
}

void save_trace_binary(const Trace& trace, const std::string& path) {
    std::string out;
    out.reserve(16 + 4 * trace.size());
    out += "LPRT";
    put_u32(out, 1);
    put_u64(out, trace.size());
    for (ItemId id : trace.accesses) put_u32(out, id);
    atomic_write_file(path, out);
}

void atomic_write_file(const std::string& path, const std::string& content) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write file: " + tmp);
        out.write(content.data(),
                  static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

}  // namespace lpr
