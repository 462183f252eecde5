#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

namespace {

std::string g_tool;
std::string g_dir;

int run(const std::string& args) {
    std::string cmd = g_tool + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_capture(const std::string& args, std::string& out) {
    std::string tmp = g_dir + "/stdout.txt";
    std::string cmd = g_tool + " " + args + " > " + tmp + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    std::ifstream in(tmp);
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

std::string fixture_dist() {
    std::string path = g_dir + "/fixture.txt";
    write_file(path,
               "# reference 8-point law\n"
               "0.0625\n0.1875\n0.1875\n0\n0.25\n0\n0\n0.3125\n");
    return path;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

double json_number(const std::string& text, const std::string& key) {
    std::string tag = "\"" + key + "\":";
    auto pos = text.find(tag);
    REQUIRE(pos != std::string::npos);
    return std::strtod(text.c_str() + pos + tag.size(), nullptr);
}

}  // namespace

TEST_CASE("segments subcommand reports the hull breakpoints") {
    std::string out;
    REQUIRE(run_capture("segments --dist " + fixture_dist(), out) == 0);
    CHECK(contains(out, "\"q\": [\n    1,\n    3,\n    5,\n    8\n  ]"));
    CHECK(contains(out, "\"V\": 8"));
    CHECK(contains(out, "\"kl\""));
}

TEST_CASE("counterexample subcommand") {
    std::string out;
    REQUIRE(run_capture("counterexample", out) == 0);
    CHECK(contains(out, "\"C2_eviction_depth\": 2"));
    CHECK(contains(out, "\"C3_eviction_depth\": 5"));
    CHECK(contains(out, "\"inclusion_violated\": true"));
}

TEST_CASE("gen-trace is deterministic and formats interoperate") {
    std::string dist = fixture_dist();
    std::string t1 = g_dir + "/a.trace", t2 = g_dir + "/b.trace";
    std::string tb = g_dir + "/c.trace";
    REQUIRE(run("gen-trace --dist " + dist + " --n 500 --seed 7 --out " +
                t1) == 0);
    REQUIRE(run("gen-trace --dist " + dist + " --n 500 --seed 7 --out " +
                t2) == 0);
    CHECK(read_file(t1) == read_file(t2));
    CHECK(!read_file(t1).empty());
    REQUIRE(run("gen-trace --dist " + dist +
                " --n 500 --seed 7 --binary --out " + tb) == 0);
    CHECK(read_file(tb).substr(0, 4) == "LPRT");

    // Text and binary encodings of the same trace simulate identically.
    std::string s1, s2;
    std::string base = "simulate --dist " + dist +
                       " --policy lpr --capacity 2..8 --trace ";
    REQUIRE(run_capture(base + t1, s1) == 0);
    REQUIRE(run_capture(base + tb, s2) == 0);
    CHECK(s1 == s2);
    CHECK(contains(s1, "capacity,policy,accesses,misses,miss_rate\n"));
    CHECK(contains(s1, "2,lpr,500,"));
}

TEST_CASE("simulate emits json when asked") {
    std::string out;
    REQUIRE(run_capture("simulate --dist " + fixture_dist() +
                            " --policy opt --capacity 4 --n 300 --seed 3 "
                            "--format json",
                        out) == 0);
    CHECK(contains(out, "\"capacity\": 4"));
    CHECK(contains(out, "\"policy\": \"opt\""));
    CHECK(contains(out, "\"accesses\": 300"));
}

TEST_CASE("miss-curve handles an empty trace") {
    std::string out;
    REQUIRE(run_capture("miss-curve --dist " + fixture_dist() +
                            " --n 0 --seed 1",
                        out) == 0);
    CHECK(contains(out, "capacity,misses,miss_rate\n"));
    for (int c = 1; c <= 8; ++c)
        CHECK(contains(out, std::to_string(c) + ",0,0\n"));
}

TEST_CASE("miss-curve agrees with per-capacity simulation") {
    std::string dist = fixture_dist();
    std::string trace = g_dir + "/mc.trace";
    REQUIRE(run("gen-trace --dist " + dist + " --n 2000 --seed 11 --out " +
                trace) == 0);
    std::string curve, sims;
    REQUIRE(run_capture("miss-curve --dist " + dist + " --trace " + trace,
                        curve) == 0);
    REQUIRE(run_capture("simulate --dist " + dist + " --trace " + trace +
                            " --policy lpr --capacity 1..8",
                        sims) == 0);
    // Same (capacity, misses) pairs, modulo the extra policy column.
    std::istringstream cin(curve), sin(sims);
    std::string cline, sline;
    std::getline(cin, cline);
    std::getline(sin, sline);
    while (std::getline(cin, cline) && std::getline(sin, sline)) {
        std::string cap = cline.substr(0, cline.find(','));
        std::string misses = cline.substr(cline.find(',') + 1);
        misses = misses.substr(0, misses.find(','));
        CHECK(contains(sline, cap + ",lpr,2000," + misses + ","));
    }
}

TEST_CASE("bounds subcommand report") {
    std::string out;
    REQUIRE(run_capture("bounds --dist " + fixture_dist() +
                            " --capacity 2 --n 20000 --seed 5",
                        out) == 0);
    CHECK(contains(out, "\"C\": 2"));
    CHECK(contains(out, "\"best_G\": 3"));
    CHECK(json_number(out, "M_lpr") == doctest::Approx(0.75));
    CHECK(json_number(out, "L_opt") == doctest::Approx(0.43131).epsilon(1e-4));
    CHECK(contains(out, "\"chi_tilde\""));
    CHECK(contains(out, "\"empirical_chi\""));
}

TEST_CASE("bellman-c2 subcommand") {
    std::string out;
    REQUIRE(run_capture("bellman-c2 --dist " + fixture_dist(), out) == 0);
    CHECK(json_number(out, "lambda") == doctest::Approx(0.8125));
    CHECK(json_number(out, "miss_rate") == doctest::Approx(0.75));
}

TEST_CASE("dp subcommand shape") {
    std::string out;
    REQUIRE(run_capture("dp --dist " + fixture_dist() +
                            " --capacity 1 --horizon 2",
                        out) == 0);
    CHECK(contains(out, "\"C\": 1"));
    CHECK(contains(out, "\"horizon\": 2"));
    CHECK(contains(out, "\"states\""));
}

TEST_CASE("allocate from an items file") {
    std::string items = g_dir + "/items.json";
    write_file(items, "[[[1.0,0.5],[2.0,0.1]],[[1.0,0.4],[2.0,0.35]]]");
    std::string out;
    REQUIRE(run_capture("allocate --items " + items + " --budget 3", out) ==
            0);
    CHECK(contains(out, "\"total_miss\": 0.5"));
    CHECK(contains(out, "\"mixture_item\": -1"));

    // The same frontiers with named fields parse identically.
    std::string named = g_dir + "/items_named.json";
    write_file(named,
               "[[{\"eta\":1.0,\"zeta\":0.5},{\"eta\":2.0,\"zeta\":0.1}],"
               "[{\"eta\":1.0,\"zeta\":0.4},{\"eta\":2.0,\"zeta\":0.35}]]");
    std::string out2;
    REQUIRE(run_capture("allocate --items " + named + " --budget 3", out2) ==
            0);
    CHECK(out2 == out);
}

TEST_CASE("allocate identical items from a distribution") {
    std::string out;
    REQUIRE(run_capture("allocate --dist " + fixture_dist() +
                            " --count 8 --budget 4",
                        out) == 0);
    CHECK(json_number(out, "total_occupancy") == doctest::Approx(4.0));
    CHECK(json_number(out, "total_miss") ==
          doctest::Approx(0.4375).epsilon(1e-9));
}

TEST_CASE("partition subcommand") {
    std::string procs = g_dir + "/procs.json";
    write_file(procs,
               "[{\"weight\":0.5,\"items\":[[[1.0,0.5],[2.0,0.1]]]},"
               "{\"weight\":0.5,\"items\":[[[1.0,0.5],[2.0,0.1]]]}]");
    std::string out;
    REQUIRE(run_capture("partition --items " + procs + " --budget 4", out) ==
            0);
    CHECK(contains(out, "\"capacities\": [\n    2.0,\n    2.0\n  ]"));
}

TEST_CASE("validation failures exit with code 1") {
    CHECK(run("segments") == 1);                     // missing required
    CHECK(run("segments --dist /nonexistent") == 1); // unreadable input
    CHECK(run("no-such-command") == 1);
    CHECK(run("simulate --dist " + fixture_dist() +
              " --policy bogus --capacity 2") == 1);
    CHECK(run("simulate --dist " + fixture_dist() +
              " --policy lru --capacity 9..2") == 1);
    std::string bad = g_dir + "/bad.txt";
    write_file(bad, "0.5\n0.6\n");  // sums to 1.1
    CHECK(run("segments --dist " + bad) == 1);
    // ... unless --normalize rescales it.
    CHECK(run("segments --dist " + bad + " --normalize") == 0);
}

TEST_CASE("--out writes the same bytes as stdout") {
    std::string out;
    std::string path = g_dir + "/seg.json";
    REQUIRE(run_capture("segments --dist " + fixture_dist(), out) == 0);
    REQUIRE(run("segments --dist " + fixture_dist() + " --out " + path) ==
            0);
    CHECK(read_file(path) == out);
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: %s [doctest args] <path-to-tool>\n",
                     argv[0]);
        return 1;
    }
    g_tool = argv[argc - 1];
    char tmpl[] = "/tmp/lpr_cli_test_XXXXXX";
    if (!mkdtemp(tmpl)) {
        std::perror("mkdtemp");
        return 1;
    }
    g_dir = tmpl;
    doctest::Context ctx;
    ctx.applyCommandLine(argc - 1, argv);
    return ctx.run();
}
