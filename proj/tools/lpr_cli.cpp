#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <optional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpr/allocation.hpp"
#include "lpr/bounds.hpp"
#include "lpr/control.hpp"
#include "lpr/dist.hpp"
#include "lpr/faststack.hpp"
#include "lpr/policies.hpp"
#include "lpr/segments.hpp"

using json = nlohmann::ordered_json;

namespace {

// Fixed-format double so identical runs produce identical bytes.
std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty())
        std::cout << content;
    else
        lpr::atomic_write_file(out_path, content);
}

// Traces may be text (one id per line) or binary; sniff the magic.
lpr::Trace load_trace_any(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot open trace file: " + path);
    char magic[4] = {0, 0, 0, 0};
    in.read(magic, 4);
    in.close();
    if (in.gcount() == 4 && magic[0] == 'L' && magic[1] == 'P' &&
        magic[2] == 'R' && magic[3] == 'T')
        return lpr::load_trace_binary(path);
    return lpr::load_trace_text(path);
}

// "A..B" or a single integer.
std::vector<std::size_t> parse_capacities(const std::string& text) {
    std::vector<std::size_t> out;
    auto dots = text.find("..");
    if (dots == std::string::npos) {
        out.push_back(std::stoul(text));
        return out;
    }
    std::size_t a = std::stoul(text.substr(0, dots));
    std::size_t b = std::stoul(text.substr(dots + 2));
    if (a < 1 || b < a)
        throw std::invalid_argument("bad capacity range: " + text);
    for (std::size_t c = a; c <= b; ++c) out.push_back(c);
    return out;
}

struct ParsedPolicy {
    lpr::PolicySpec spec;
    bool belady = false;
    bool needs_segments = false;
};

ParsedPolicy parse_policy(const std::string& text) {
    ParsedPolicy p;
    if (text == "lru") {
        p.spec = lpr::PolicySpec::lru();
    } else if (text == "mru") {
        p.spec = lpr::PolicySpec::mru();
    } else if (text == "fifo") {
        p.spec = lpr::PolicySpec::fifo();
    } else if (text == "lpr") {
        p.needs_segments = true;
    } else if (text == "opt") {
        p.belady = true;
    } else if (text.rfind("kl:", 0) == 0) {
        auto rest = text.substr(3);
        auto colon = rest.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("policy kl needs kl:K:L");
        p.spec = lpr::PolicySpec::kl(std::stoul(rest.substr(0, colon)),
                                     std::stoul(rest.substr(colon + 1)));
    } else {
        throw std::invalid_argument("unknown policy: " + text);
    }
    return p;
}

lpr::SepList sep_list_from_json(const json& j) {
    lpr::SepList list;
    for (const auto& pt : j) {
        lpr::SepPoint p;
        if (pt.is_array()) {
            p.eta = pt.at(0).get<double>();
            p.zeta = pt.at(1).get<double>();
        } else {
            p.eta = pt.at("eta").get<double>();
            p.zeta = pt.at("zeta").get<double>();
        }
        list.push_back(std::move(p));
    }
    return list;
}

json allocation_to_json(const lpr::Allocation& alloc) {
    json j;
    j["choice"] = alloc.choice;
    j["mixture_item"] = alloc.mixture_item;
    j["gamma"] = alloc.gamma;
    j["total_occupancy"] = alloc.total_occupancy;
    j["total_miss"] = alloc.total_miss;
    return j;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"LRU stack-model policy toolkit"};
    app.require_subcommand(1);

    std::string dist_path, trace_path, out_path, format = "csv";
    std::string capacity_text, policy_text = "lru", items_path;
    std::uint64_t seed = 1;
    std::uint64_t n = 100000;
    std::size_t horizon = 8;
    std::size_t count = 1;
    double budget = 0.0;
    bool normalize = false, binary = false;

    auto add_dist = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--dist", dist_path,
                                    "distribution file (one probability per "
                                    "line, '#' comments)");
        if (required) opt->required();
        cmd->add_flag("--normalize", normalize,
                      "rescale the distribution to sum to 1");
    };

    auto* gen = app.add_subcommand("gen-trace",
                                   "sample an access trace from a "
                                   "distribution");
    add_dist(gen, true);
    gen->add_option("--n", n, "number of accesses");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--out", out_path, "output trace file")->required();
    gen->add_flag("--binary", binary, "write the binary trace format");

    auto* seg = app.add_subcommand("segments",
                                   "segment boundaries, priorities, and "
                                   "per-capacity eviction parameters");
    add_dist(seg, true);
    seg->add_option("--out", out_path, "output file (default stdout)");

    auto* sim = app.add_subcommand("simulate",
                                   "simulate a policy over a trace");
    add_dist(sim, false);
    sim->add_option("--trace", trace_path, "trace file (text or binary)");
    sim->add_option("--n", n, "accesses to generate when no trace given");
    sim->add_option("--seed", seed, "random seed");
    sim->add_option("--policy", policy_text,
                    "lru|mru|fifo|kl:K:L|lpr|opt");
    sim->add_option("--capacity,--capacities", capacity_text,
                    "capacity C or range A..B")
        ->required();
    sim->add_option("--format", format, "csv|json");
    sim->add_option("--out", out_path, "output file (default stdout)");

    auto* curve = app.add_subcommand("miss-curve",
                                     "all-capacity miss curve in one pass");
    add_dist(curve, true);
    curve->add_option("--trace", trace_path, "trace file (text or binary)");
    curve->add_option("--n", n, "accesses to generate when no trace given");
    curve->add_option("--seed", seed, "random seed");
    curve->add_option("--format", format, "csv|json");
    curve->add_option("--out", out_path, "output file (default stdout)");

    auto* bnd = app.add_subcommand("bounds",
                                   "optimal-policy lower bound and "
                                   "competitive-ratio report");
    add_dist(bnd, true);
    bnd->add_option("--capacity", capacity_text, "capacity C")->required();
    bnd->add_option("--n", n, "trace length for the empirical ratio");
    bnd->add_option("--seed", seed, "random seed");
    bnd->add_option("--out", out_path, "output file (default stdout)");

    auto* dp = app.add_subcommand("dp",
                                  "finite-horizon optimal cost table");
    add_dist(dp, true);
    dp->add_option("--capacity", capacity_text, "capacity C")->required();
    dp->add_option("--horizon", horizon, "number of accesses");
    dp->add_option("--out", out_path, "output file (default stdout)");

    auto* c2 = app.add_subcommand("bellman-c2",
                                  "closed-form average-cost solution for "
                                  "capacity 2");
    add_dist(c2, true);
    c2->add_option("--out", out_path, "output file (default stdout)");

    auto* cx = app.add_subcommand("counterexample",
                                  "optimal eviction need not be a stack "
                                  "policy: the V=8 construction");
    cx->add_option("--out", out_path, "output file (default stdout)");

    auto* alloc_cmd = app.add_subcommand("allocate",
                                         "greedy buffer allocation over "
                                         "per-item cost frontiers");
    alloc_cmd->add_option("--items", items_path,
                          "JSON file: list of frontiers, each a list of "
                          "[occupancy, miss] points");
    add_dist(alloc_cmd, false);
    alloc_cmd->add_option("--count", count,
                          "with --dist: number of identical items");
    alloc_cmd->add_option("--budget", budget, "occupancy budget")->required();
    alloc_cmd->add_option("--out", out_path, "output file (default stdout)");

    auto* part = app.add_subcommand("partition",
                                    "shared-buffer split across weighted "
                                    "processes");
    part->add_option("--items", items_path,
                     "JSON file: list of {weight, items} processes")
        ->required();
    part->add_option("--budget", budget, "occupancy budget")->required();
    part->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // bad arguments = validation error
    }

    auto load_dist = [&]() {
        return lpr::load_distribution(dist_path, normalize);
    };
    auto get_trace = [&](const lpr::StackDistribution& dist) {
        if (!trace_path.empty()) return load_trace_any(trace_path);
        lpr::Rng rng(seed);
        return lpr::generate_trace(dist,
                                   lpr::LruStack::identity(dist.space_size()),
                                   n, rng);
    };

    if (gen->parsed()) {
        lpr::StackDistribution dist = load_dist();
        lpr::Rng rng(seed);
        lpr::Trace trace = lpr::generate_trace(
            dist, lpr::LruStack::identity(dist.space_size()), n, rng);
        if (binary)
            lpr::save_trace_binary(trace, out_path);
        else
            lpr::save_trace_text(trace, out_path);
        return 0;
    }

    if (seg->parsed()) {
        lpr::StackDistribution dist = load_dist();
        lpr::Segmentation s = lpr::segmentation(dist);
        json j;
        j["V"] = dist.space_size();
        j["q"] = s.breakpoints();
        json xi = json::array();
        for (std::size_t d = 2; d <= dist.space_size(); ++d)
            xi.push_back(s.xi(d));
        j["xi"] = xi;
        json kl = json::array();
        for (std::size_t c = 2; c <= dist.space_size(); ++c) {
            lpr::KLParams p = lpr::kl_for_capacity(s, c);
            json row;
            row["C"] = c;
            row["K"] = p.K;
            row["L"] = p.L;
            row["miss_rate"] =
                c < dist.space_size()
                    ? lpr::kl_miss_rate(dist, p.K, p.L, c)
                    : 0.0;
            kl.push_back(row);
        }
        j["kl"] = kl;
        emit(j.dump(2) + "\n", out_path);
        return 0;
    }

    if (sim->parsed()) {
        ParsedPolicy pol = parse_policy(policy_text);
        if ((pol.needs_segments || trace_path.empty()) && dist_path.empty())
            throw std::invalid_argument(
                "simulate: --dist required for the lpr policy and for "
                "trace generation");
        lpr::StackDistribution dist;
        std::optional<lpr::Segmentation> segs;
        if (!dist_path.empty()) {
            dist = load_dist();
            if (pol.needs_segments) {
                segs.emplace(lpr::segmentation(dist));
                pol.spec = lpr::PolicySpec::lpr(*segs);
            }
        }
        lpr::Trace trace = get_trace(dist);
        std::vector<std::size_t> capacities = parse_capacities(capacity_text);
        std::ostringstream csv;
        json rows = json::array();
        csv << "capacity,policy,accesses,misses,miss_rate\n";
        for (std::size_t c : capacities) {
            lpr::SimResult r = pol.belady
                                   ? lpr::simulate_belady(trace, c)
                                   : lpr::simulate(pol.spec, trace, c);
            csv << c << ',' << policy_text << ',' << r.accesses << ','
                << r.misses << ',' << fmt(r.miss_rate()) << '\n';
            json row;
            row["capacity"] = c;
            row["policy"] = policy_text;
            row["accesses"] = r.accesses;
            row["misses"] = r.misses;
            row["miss_rate"] = r.miss_rate();
            rows.push_back(row);
        }
        emit(format == "json" ? rows.dump(2) + "\n" : csv.str(), out_path);
        return 0;
    }

    if (curve->parsed()) {
        lpr::StackDistribution dist = load_dist();
        lpr::Segmentation s = lpr::segmentation(dist);
        lpr::Trace trace = get_trace(dist);
        lpr::MissCurve mc = lpr::miss_curve(s, trace);
        std::ostringstream csv;
        json rows = json::array();
        csv << "capacity,misses,miss_rate\n";
        for (std::size_t c = 1; c <= dist.space_size(); ++c) {
            double rate = mc.accesses
                              ? static_cast<double>(mc.misses[c]) /
                                    static_cast<double>(mc.accesses)
                              : 0.0;
            csv << c << ',' << mc.misses[c] << ',' << fmt(rate) << '\n';
            json row;
            row["capacity"] = c;
            row["misses"] = mc.misses[c];
            row["miss_rate"] = rate;
            rows.push_back(row);
        }
        emit(format == "json" ? rows.dump(2) + "\n" : csv.str(), out_path);
        return 0;
    }

    if (bnd->parsed()) {
        lpr::StackDistribution dist = load_dist();
        std::size_t c = parse_capacities(capacity_text).front();
        lpr::LOptResult lo = lpr::l_opt(dist, c);
        lpr::ChiBound chi = lpr::chi_upper_bound(dist, c);
        double emp = n > 0 ? lpr::empirical_chi(dist, c, n, seed) : 0.0;
        json j;
        j["C"] = c;
        j["L_opt"] = lo.value;
        j["best_G"] = lo.best_g;
        j["M_lpr"] = chi.m_lpr;
        j["chi_tilde"] = chi.chi_tilde;
        j["chi_direct_ratio"] = chi.direct_ratio;
        j["chi_log_c_form"] = chi.log_c_form;
        j["empirical_chi"] = emp;
        emit(j.dump(2) + "\n", out_path);
        return 0;
    }

    if (dp->parsed()) {
        lpr::StackDistribution dist = load_dist();
        std::size_t c = parse_capacities(capacity_text).front();
        lpr::FiniteMdp mdp = lpr::build_mdp(dist, c);
        lpr::HorizonTable table = lpr::dp_optimal(mdp, horizon);
        json j;
        j["V"] = dist.space_size();
        j["C"] = c;
        j["horizon"] = horizon;
        json states = json::array();
        for (std::size_t i = 0; i < mdp.state_count(); ++i)
            states.push_back(mdp.state_mask(i));
        j["states"] = states;
        j["cost"] = table.cost;
        emit(j.dump(2) + "\n", out_path);
        return 0;
    }

    if (c2->parsed()) {
        lpr::StackDistribution dist = load_dist();
        lpr::BellmanC2Solution sol = lpr::bellman_c2(dist);
        json j;
        j["lambda"] = sol.lambda;
        j["miss_rate"] = sol.lambda - dist.s(1);
        json h = json::array();
        for (std::size_t d = 2; d <= dist.space_size(); ++d)
            h.push_back(sol.h[d]);
        j["h"] = h;
        j["max_residual"] = sol.max_residual;
        emit(j.dump(2) + "\n", out_path);
        return 0;
    }

    if (cx->parsed()) {
        lpr::CounterexampleReport r = lpr::counterexample_check();
        json j;
        j["C2_eviction_depth"] = r.c2_eviction_depth;
        j["C3_eviction_depth"] = r.c3_eviction_depth;
        j["horizon"] = r.horizon;
        j["C2_unique"] = r.c2_unique;
        j["C3_unique"] = r.c3_unique;
        j["infinite_horizon_agrees"] = r.infinite_horizon_agrees;
        j["inclusion_violated"] = r.inclusion_violated;
        emit(j.dump(2) + "\n", out_path);
        return 0;
    }

    if (alloc_cmd->parsed()) {
        std::vector<lpr::SepList> items;
        if (!items_path.empty()) {
            std::ifstream in(items_path);
            if (!in)
                throw std::invalid_argument("cannot open items file: " +
                                            items_path);
            json spec = json::parse(in);
            for (const auto& item : spec)
                items.push_back(sep_list_from_json(item));
        } else if (!dist_path.empty()) {
            lpr::StackDistribution dist = load_dist();
            lpr::SepList frontier =
                lpr::sep_sweep(lpr::lrusm_cg(dist));
            for (std::size_t i = 0; i < count; ++i) items.push_back(frontier);
        } else {
            throw std::invalid_argument("allocate: need --items or --dist");
        }
        lpr::Allocation alloc = lpr::greedy_allocate(items, budget);
        emit(allocation_to_json(alloc).dump(2) + "\n", out_path);
        return 0;
    }

    if (part->parsed()) {
        std::ifstream in(items_path);
        if (!in)
            throw std::invalid_argument("cannot open items file: " +
                                        items_path);
        json spec = json::parse(in);
        std::vector<lpr::PartitionProcess> processes;
        for (const auto& proc : spec) {
            lpr::PartitionProcess p;
            p.weight = proc.at("weight").get<double>();
            for (const auto& item : proc.at("items"))
                p.items.push_back(sep_list_from_json(item));
            processes.push_back(std::move(p));
        }
        lpr::PartitionResult r = lpr::partition_buffer(processes, budget);
        json j;
        j["allocation"] = allocation_to_json(r.allocation);
        j["capacities"] = r.capacities;
        j["miss_rates"] = r.miss_rates;
        emit(j.dump(2) + "\n", out_path);
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
