// Result records, grids, the fn-eval cache, and the installed command-line
// binary driven end to end through std::system. The binary path comes in
// through the CHARPOLY_BIN compile definition.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "charpoly/results.hpp"

using namespace charpoly;
using Catch::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() /
                     ("charpoly_test_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run_cmd(const std::string& cmd) {
    const int st = std::system(cmd.c_str());
    if (st == -1) return -1;
    return WIFEXITED(st) ? WEXITSTATUS(st) : -2;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

ResultRecord sample_record() {
    ResultRecord r;
    r.command = "fn-eval";
    r.n = 2;
    r.N = 100;
    r.J = 1.0 / 3.0;
    r.mu = -2.5e17;
    r.omega = 0.0;
    r.delta = 1e-308;  // denormal boundary survives the 17-digit round trip
    r.eps = 0.1 + 0.2;
    r.method = "quadrature;tol=9.9999999999999998e-13";
    r.value_re = 1.1444630797366952;
    r.value_im = -3.0e-17;
    r.abs_error = 2.2250738585072014e-308;
    r.samples = 12345678901234567ull;
    r.seed = 2026;
    r.stream = 7;
    r.wall_ms = 0.125;
    return r;
}

}  // namespace

TEST_CASE("csv schema: header and numerically exact round trip") {
    CHECK(std::string(csv_header()) ==
          "command,n,N,J,mu,omega,delta,eps,method,value_re,value_im,"
          "abs_error,samples,seed,stream,wall_ms");

    const ResultRecord r = sample_record();
    const fs::path p = scratch_dir() / "roundtrip.csv";
    write_results({r}, p.string(), OutputFormat::CSV);
    const auto back = parse_csv(p.string());
    REQUIRE(back.size() == 1);
    const ResultRecord& b = back[0];
    CHECK(b.command == r.command);
    CHECK(b.n == r.n);
    CHECK(b.N == r.N);
    CHECK(b.J == r.J);  // bitwise, thanks to %.17g
    CHECK(b.mu == r.mu);
    CHECK(b.delta == r.delta);
    CHECK(b.eps == r.eps);
    CHECK(b.method == r.method);
    CHECK(b.value_re == r.value_re);
    CHECK(b.value_im == r.value_im);
    CHECK(b.abs_error == r.abs_error);
    CHECK(b.samples == r.samples);
    CHECK(b.seed == r.seed);
    CHECK(b.stream == r.stream);
    CHECK(b.wall_ms == r.wall_ms);
}

TEST_CASE("empty record list writes just the header") {
    const fs::path p = scratch_dir() / "empty.csv";
    write_results({}, p.string(), OutputFormat::CSV);
    CHECK(slurp(p) == std::string(csv_header()) + "\n");
}

TEST_CASE("json round trip preserves every field") {
    const ResultRecord r = sample_record();
    const ResultRecord b = record_from_json(to_json(r));
    CHECK(b.command == r.command);
    CHECK(b.J == r.J);
    CHECK(b.mu == r.mu);
    CHECK(b.delta == r.delta);
    CHECK(b.value_re == r.value_re);
    CHECK(b.samples == r.samples);

    const fs::path p = scratch_dir() / "records.json";
    write_results({r, r}, p.string(), OutputFormat::JSON);
    const nlohmann::json doc = nlohmann::json::parse(slurp(p));
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 2);
    CHECK(record_from_json(doc[0]).eps == r.eps);
}

TEST_CASE("eps grid parsing") {
    const auto pts = parse_eps_grid("1e-4:1:5:logspace");
    REQUIRE(pts.size() == 5);
    CHECK(pts.front() == Approx(1e-4).epsilon(1e-15));
    CHECK(pts.back() == Approx(1.0).epsilon(1e-15));
    for (int i = 1; i < 5; ++i)
        CHECK(pts[i] / pts[i - 1] == Approx(10.0).epsilon(1e-12));

    CHECK(parse_eps_grid("0.5:9:1:logspace") == std::vector<double>{0.5});

    CHECK_THROWS_AS(parse_eps_grid("1:2:3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_eps_grid("1:2:3:linspace"), std::invalid_argument);
    CHECK_THROWS_AS(parse_eps_grid("-1:2:3:logspace"), std::invalid_argument);
    CHECK_THROWS_AS(parse_eps_grid("1:2:0:logspace"), std::invalid_argument);
}

TEST_CASE("fn cache: exact-key store, merge, and corruption handling") {
    const fs::path p = scratch_dir() / "cache.json";
    FnCache cache(p.string());

    const std::string key = cache_key(2, 1.0, "quadrature", 1e-8);
    CHECK_FALSE(cache.lookup(key).has_value());
    CHECK(cache.hits() == 0);

    FnEvaluation fe;
    fe.n_order = 2;
    fe.epsilon = 1.0;
    fe.value = 3.25;
    fe.abs_error = 1e-9;
    fe.method = FnMethod::QUADRATURE;
    cache.store(key, fe);

    const auto hit = cache.lookup(key);
    REQUIRE(hit.has_value());
    CHECK(hit->value == 3.25);
    CHECK(hit->method == FnMethod::QUADRATURE);
    CHECK(cache.hits() == 1);

    // a different tolerance is a different key
    CHECK_FALSE(cache.lookup(cache_key(2, 1.0, "quadrature", 1e-6)).has_value());

    // second store merges instead of clobbering
    const std::string key2 = cache_key(3, 0.5, "pfaffian", 0.0);
    FnEvaluation fe2 = fe;
    fe2.n_order = 3;
    fe2.value = -1.5;
    fe2.method = FnMethod::PFAFFIAN;
    cache.store(key2, fe2);
    CHECK(cache.lookup(key).has_value());
    CHECK(cache.lookup(key2)->method == FnMethod::PFAFFIAN);

    // no temp files left behind by the rename dance
    int stray = 0;
    for (const auto& e : fs::directory_iterator(scratch_dir()))
        if (e.path().filename().string().find("cache.json.tmp") == 0) ++stray;
    CHECK(stray == 0);

    // trashed cache file reads as empty, then heals on the next store
    {
        std::ofstream out(p, std::ios::trunc);
        out << "{ not json";
    }
    CHECK_FALSE(cache.lookup(key).has_value());
    cache.store(key, fe);
    CHECK(cache.lookup(key).has_value());
}

// ---- end-to-end runs of the installed binary ------------------------------

namespace {
const std::string kBin = CHARPOLY_BIN;
}

TEST_CASE("cli: version flag") {
    CHECK(run_cmd("'" + kBin + "' --version > /dev/null") == 0);
}

TEST_CASE("cli: fn-eval single point to csv") {
    const fs::path out = scratch_dir() / "fn1.csv";
    const int rc = run_cmd("'" + kBin +
                           "' fn-eval --n 1 --eps 1 --method quadrature "
                           "--tol 1e-9 --out '" +
                           out.string() + "' 2> /dev/null");
    REQUIRE(rc == 0);
    const auto recs = parse_csv(out.string());
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].command == "fn-eval");
    CHECK(recs[0].n == 1);
    CHECK(recs[0].eps == 1.0);
    CHECK(recs[0].value_re == Approx(1.1444631).margin(1e-5));
    CHECK(recs[0].method.rfind("quadrature;tol=", 0) == 0);
}

TEST_CASE("cli: json output parses") {
    const fs::path out = scratch_dir() / "fn2.json";
    const int rc = run_cmd("'" + kBin +
                           "' fn-eval --ensemble gue --n 2 --eps 2 "
                           "--format json --out '" +
                           out.string() + "' 2> /dev/null");
    REQUIRE(rc == 0);
    const nlohmann::json doc = nlohmann::json::parse(slurp(out));
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 1);
    const ResultRecord r = record_from_json(doc[0]);
    CHECK(r.value_re == Approx(0.125).epsilon(1e-12));  // GUE F_2(2)
    CHECK(r.method == "closed_form");
}

TEST_CASE("cli: config file supplies defaults, flags win") {
    const fs::path cfg = scratch_dir() / "run.json";
    {
        std::ofstream out(cfg);
        out << R"({"eps": 0.25, "method": "quadrature", "ensemble": "gue", "n": 2})";
    }
    const fs::path out = scratch_dir() / "fn3.csv";
    const int rc = run_cmd("'" + kBin + "' fn-eval --config '" + cfg.string() +
                           "' --method closed_form --out '" + out.string() +
                           "' 2> /dev/null");
    REQUIRE(rc == 0);
    const auto recs = parse_csv(out.string());
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].eps == 0.25);               // from config
    CHECK(recs[0].method == "closed_form");   // flag overrode config
    CHECK(recs[0].n == 2);
}

TEST_CASE("cli: asymp-scan warms and then reuses the cache") {
    const fs::path cache = scratch_dir() / "scan_cache.json";
    const fs::path err1 = scratch_dir() / "scan1.err";
    const fs::path err2 = scratch_dir() / "scan2.err";
    const std::string base = "'" + kBin +
                             "' asymp-scan --n 2 --eps-grid "
                             "1e-4:1e-2:5:logspace --cache '" +
                             cache.string() + "' --out /dev/null";
    REQUIRE(run_cmd(base + " 2> '" + err1.string() + "'") == 0);
    CHECK(slurp(err1).find("cache hits 0 of 5") != std::string::npos);
    CHECK(slurp(err1).find("log-law fit: slope") != std::string::npos);

    REQUIRE(run_cmd(base + " 2> '" + err2.string() + "'") == 0);
    CHECK(slurp(err2).find("cache hits 5 of 5") != std::string::npos);
}

TEST_CASE("cli: cache path falls back to the environment variable") {
    const fs::path cache = scratch_dir() / "env_cache.json";
    const std::string cmd = "CHARPOLY_CACHE='" + cache.string() + "' '" + kBin +
                            "' fn-eval --n 1 --eps 0.7 --method pfaffian "
                            "--out /dev/null 2> /dev/null";
    REQUIRE(run_cmd(cmd) == 0);
    CHECK(fs::exists(cache));
}

TEST_CASE("cli: two concurrent writers leave one healthy cache file") {
    const fs::path cache = scratch_dir() / "race_cache.json";
    // same key from both sides plus one private key each; the losing rename
    // may drop a private key, but the survivor must parse and hold the
    // contested entry
    const std::string common = " fn-eval --n 1 --eps 0.5 --method pfaffian ";
    const std::string left = "'" + kBin + "'" + common +
                             "--cache '" + cache.string() +
                             "' --out /dev/null 2> /dev/null";
    const std::string right = "'" + kBin + "'" + common +
                              "--eps-grid 0.5:0.9:2:logspace --cache '" +
                              cache.string() + "' --out /dev/null 2> /dev/null";
    REQUIRE(run_cmd("( " + left + " & " + right + " & wait )") == 0);

    const nlohmann::json doc =
        nlohmann::json::parse(slurp(cache), nullptr, false);
    REQUIRE_FALSE(doc.is_discarded());
    REQUIRE(doc.is_object());
    FnCache reader(cache.string());
    CHECK(reader.lookup(cache_key(1, 0.5, "pfaffian", 0.0)).has_value());

    int stray = 0;
    for (const auto& e : fs::directory_iterator(scratch_dir()))
        if (e.path().filename().string().find("race_cache.json.tmp") == 0)
            ++stray;
    CHECK(stray == 0);
}

TEST_CASE("cli: exit codes distinguish failure modes") {
    // unknown method name
    CHECK(run_cmd("'" + kBin +
                  "' fn-eval --method newton --eps 1 2> /dev/null") != 0);
    // single out-of-domain point is a hard failure
    CHECK(run_cmd("'" + kBin +
                  "' fn-eval --eps 2000 --out /dev/null 2> /dev/null") == 1);
    // a grid keeps going when one row fails
    const fs::path out = scratch_dir() / "partial.csv";
    const int rc = run_cmd("'" + kBin +
                           "' fn-eval --n 1 --eps-grid 1:2000:3:logspace "
                           "--method pfaffian --out '" +
                           out.string() + "' 2> /dev/null");
    CHECK(rc == 0);
    CHECK(parse_csv(out.string()).size() == 2);
    // missing required grid for the scan commands
    CHECK(run_cmd("'" + kBin + "' asymp-scan 2> /dev/null") == 1);
    CHECK(run_cmd("'" + kBin + "' cluster-scan 2> /dev/null") == 1);
}

TEST_CASE("cli: cluster-scan emits one row per grid point") {
    const fs::path out = scratch_dir() / "cluster.csv";
    const int rc = run_cmd("'" + kBin +
                           "' cluster-scan --p 1 --k 2 --X 1 "
                           "--eps-grid 1e-3:1e-1:3:logspace --out '" +
                           out.string() + "' 2> /dev/null");
    REQUIRE(rc == 0);
    const auto recs = parse_csv(out.string());
    REQUIRE(recs.size() == 3);
    CHECK(recs[0].method == "cluster;p=1;k=2;X=1");
    // 2 atan(X/eps), decreasing in eps
    CHECK(recs[0].value_re > recs[1].value_re);
    CHECK(recs[1].value_re > recs[2].value_re);
    CHECK(recs[0].value_re == Approx(2.0 * std::atan(1e3)).epsilon(1e-9));
}

TEST_CASE("cli: mc-k1 emits a complex estimate row") {
    const fs::path out = scratch_dir() / "k1.csv";
    const fs::path err = scratch_dir() / "k1.err";
    const int rc = run_cmd("'" + kBin +
                           "' mc-k1 --N 10 --n 1 --delta 0.5 --samples 200 "
                           "--seed 5 --out '" +
                           out.string() + "' 2> '" + err.string() + "'");
    REQUIRE(rc == 0);
    const auto recs = parse_csv(out.string());
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].command == "mc-k1");
    CHECK(recs[0].N == 10);
    CHECK(recs[0].samples == 200);
    CHECK(recs[0].delta == 0.5);
    CHECK(std::isfinite(recs[0].value_re));
    CHECK(recs[0].abs_error > 0.0);
    CHECK(slurp(err).find("log|value|") != std::string::npos);
}

TEST_CASE("cli: mc-ratio runs are deterministic given a seed") {
    const fs::path a = scratch_dir() / "mc_a.csv";
    const fs::path b = scratch_dir() / "mc_b.csv";
    const std::string args =
        " mc-ratio --N 21 --n 1 --delta 0.1 --samples 200 --seed 3 --out ";
    REQUIRE(run_cmd("'" + kBin + "'" + args + "'" + a.string() +
                    "' 2> /dev/null") == 0);
    REQUIRE(run_cmd("'" + kBin + "'" + args + "'" + b.string() +
                    "' 2> /dev/null") == 0);
    const auto ra = parse_csv(a.string());
    const auto rb = parse_csv(b.string());
    REQUIRE(ra.size() == 1);
    REQUIRE(rb.size() == 1);
    CHECK(ra[0].value_re == rb[0].value_re);  // bitwise equal
    CHECK(ra[0].value_im == rb[0].value_im);
    CHECK(ra[0].abs_error == rb[0].abs_error);
    CHECK(ra[0].eps == rb[0].eps);
    CHECK(ra[0].samples == 200);
    CHECK(ra[0].seed == 3);
}
