#pragma once

// Result records, CSV/JSON serialization with a fixed column schema, and the
// exact-match fn-eval cache with atomic (write-then-rename) stores.
//
// Method strings never contain commas, so the CSV needs no quoting; extra
// run parameters that have no dedicated column (cluster k and X, tolerances)
// are encoded into the method string to keep records self-reproducing.

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "json.hpp"

#include "charpoly/errors.hpp"
#include "charpoly/fn_eval.hpp"

namespace charpoly {

struct ResultRecord {
    std::string command;
    int n = 0;
    int N = 0;
    double J = 0.0;
    double mu = 0.0;
    double omega = 0.0;
    double delta = 0.0;
    double eps = 0.0;
    std::string method;
    double value_re = 0.0;
    double value_im = 0.0;
    double abs_error = 0.0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    double wall_ms = 0.0;
};

enum class OutputFormat { CSV, JSON };

inline std::string format_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline const char* csv_header() {
    return "command,n,N,J,mu,omega,delta,eps,method,value_re,value_im,"
           "abs_error,samples,seed,stream,wall_ms";
}

inline std::string to_csv_row(const ResultRecord& r) {
    std::ostringstream os;
    os << r.command << ',' << r.n << ',' << r.N << ',' << format_g17(r.J)
       << ',' << format_g17(r.mu) << ',' << format_g17(r.omega) << ','
       << format_g17(r.delta) << ',' << format_g17(r.eps) << ',' << r.method
       << ',' << format_g17(r.value_re) << ',' << format_g17(r.value_im)
       << ',' << format_g17(r.abs_error) << ',' << r.samples << ',' << r.seed
       << ',' << r.stream << ',' << format_g17(r.wall_ms);
    return os.str();
}

inline nlohmann::json to_json(const ResultRecord& r) {
    return nlohmann::json{
        {"command", r.command}, {"n", r.n},
        {"N", r.N},             {"J", r.J},
        {"mu", r.mu},           {"omega", r.omega},
        {"delta", r.delta},     {"eps", r.eps},
        {"method", r.method},   {"value_re", r.value_re},
        {"value_im", r.value_im}, {"abs_error", r.abs_error},
        {"samples", r.samples}, {"seed", r.seed},
        {"stream", r.stream},   {"wall_ms", r.wall_ms}};
}

inline void write_results(const std::vector<ResultRecord>& records,
                          std::ostream& out, OutputFormat fmt) {
    if (fmt == OutputFormat::CSV) {
        out << csv_header() << '\n';
        for (const auto& r : records) out << to_csv_row(r) << '\n';
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& r : records) arr.push_back(to_json(r));
        out << arr.dump(2) << '\n';
    }
    out.flush();
    if (!out) throw std::runtime_error("write_results: stream write failed");
}

inline void write_results(const std::vector<ResultRecord>& records,
                          const std::string& path, OutputFormat fmt) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_results: cannot open " + path);
    write_results(records, out, fmt);
}

inline ResultRecord record_from_json(const nlohmann::json& j) {
    ResultRecord r;
    r.command = j.at("command").get<std::string>();
    r.n = j.at("n").get<int>();
    r.N = j.at("N").get<int>();
    r.J = j.at("J").get<double>();
    r.mu = j.at("mu").get<double>();
    r.omega = j.at("omega").get<double>();
    r.delta = j.at("delta").get<double>();
    r.eps = j.at("eps").get<double>();
    r.method = j.at("method").get<std::string>();
    r.value_re = j.at("value_re").get<double>();
    r.value_im = j.at("value_im").get<double>();
    r.abs_error = j.at("abs_error").get<double>();
    r.samples = j.at("samples").get<std::uint64_t>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.stream = j.at("stream").get<std::uint64_t>();
    r.wall_ms = j.at("wall_ms").get<double>();
    return r;
}

namespace detail {
// std::stod raises out_of_range on subnormals (strtod flags ERANGE on
// underflow); values that small are still representable, so convert with
// strtod directly and only reject genuine garbage or overflow.
inline double to_double(const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || (end && *end != '\0'))
        throw std::runtime_error("parse_csv: bad numeric field: " + s);
    if (v == HUGE_VAL || v == -HUGE_VAL)
        throw std::runtime_error("parse_csv: numeric overflow: " + s);
    return v;
}
}  // namespace detail

/// Parse a CSV produced by write_results (fixed 16-column schema).
inline std::vector<ResultRecord> parse_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("parse_csv: cannot open " + path);
    std::string line;
    std::vector<ResultRecord> out;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {  // header
            first = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        f.push_back(cur);
        if (f.size() != 16)
            throw std::runtime_error("parse_csv: malformed row: " + line);
        ResultRecord r;
        r.command = f[0];
        r.n = std::stoi(f[1]);
        r.N = std::stoi(f[2]);
        r.J = detail::to_double(f[3]);
        r.mu = detail::to_double(f[4]);
        r.omega = detail::to_double(f[5]);
        r.delta = detail::to_double(f[6]);
        r.eps = detail::to_double(f[7]);
        r.method = f[8];
        r.value_re = detail::to_double(f[9]);
        r.value_im = detail::to_double(f[10]);
        r.abs_error = detail::to_double(f[11]);
        r.samples = std::stoull(f[12]);
        r.seed = std::stoull(f[13]);
        r.stream = std::stoull(f[14]);
        r.wall_ms = detail::to_double(f[15]);
        out.push_back(std::move(r));
    }
    return out;
}

/// Parse a grid spec "start:stop:count:logspace" into explicit points.
/// count = 1 degenerates to {start}; start and stop must be positive.
inline std::vector<double> parse_eps_grid(const std::string& spec) {
    std::vector<std::string> f;
    std::string cur;
    for (char c : spec) {
        if (c == ':') {
            f.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    f.push_back(cur);
    if (f.size() != 4 || f[3] != "logspace")
        throw std::invalid_argument(
            "eps grid must have the form start:stop:count:logspace");
    const double start = std::stod(f[0]);
    const double stop = std::stod(f[1]);
    const long count = std::stol(f[2]);
    if (!(start > 0.0) || !(stop > 0.0))
        throw std::invalid_argument("eps grid endpoints must be positive");
    if (count < 1) throw std::invalid_argument("eps grid count must be >= 1");
    std::vector<double> pts;
    if (count == 1) {
        pts.push_back(start);
        return pts;
    }
    const double lr = std::log(stop / start);
    for (long i = 0; i < count; ++i)
        pts.push_back(start * std::exp(lr * i / (count - 1)));
    return pts;
}

/// Canonical cache key: exact match on (n, eps, method, tol).
inline std::string cache_key(int n, double eps, const std::string& method,
                             double tol) {
    std::ostringstream os;
    os << "n=" << n << "|eps=" << format_g17(eps) << "|method=" << method
       << "|tol=" << format_g17(tol);
    return os.str();
}

/// File-backed cache of FnEvaluation values. Stores are atomic via rename;
/// concurrent writers race safely (one full file wins). Corrupt or missing
/// files are treated as empty.
class FnCache {
  public:
    explicit FnCache(std::string path) : path_(std::move(path)) {}

    std::optional<FnEvaluation> lookup(const std::string& key) const {
        nlohmann::json doc = load();
        auto it = doc.find(key);
        if (it == doc.end()) return std::nullopt;
        try {
            FnEvaluation fe;
            fe.n_order = it->at("n").get<int>();
            fe.epsilon = it->at("eps").get<double>();
            fe.value = it->at("value").get<double>();
            fe.abs_error = it->at("abs_error").get<double>();
            const std::string m = it->at("method").get<std::string>();
            fe.method = m == "pfaffian"      ? FnMethod::PFAFFIAN
                        : m == "closed_form" ? FnMethod::CLOSED_FORM
                        : m == "monte_carlo" ? FnMethod::MONTE_CARLO
                                             : FnMethod::QUADRATURE;
            ++hits_;
            return fe;
        } catch (const nlohmann::json::exception&) {
            return std::nullopt;  // corrupt entry: miss
        }
    }

    void store(const std::string& key, const FnEvaluation& fe) const {
        nlohmann::json doc = load();
        doc[key] = nlohmann::json{{"n", fe.n_order},
                                  {"eps", fe.epsilon},
                                  {"value", fe.value},
                                  {"abs_error", fe.abs_error},
                                  {"method", to_string(fe.method)}};
        const std::string tmp =
            path_ + ".tmp." + std::to_string(::getpid()) + "." +
            std::to_string(reinterpret_cast<std::uintptr_t>(&doc) & 0xFFFF);
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw std::runtime_error("cache store: cannot open " + tmp);
            out << doc.dump() << '\n';
            out.flush();
            if (!out) throw std::runtime_error("cache store: write failed");
        }
        std::filesystem::rename(tmp, path_);
    }

    std::size_t hits() const { return hits_; }
    const std::string& path() const { return path_; }

  private:
    nlohmann::json load() const {
        std::ifstream in(path_);
        if (!in) return nlohmann::json::object();
        try {
            nlohmann::json doc = nlohmann::json::parse(in);
            if (!doc.is_object()) return nlohmann::json::object();
            return doc;
        } catch (const nlohmann::json::exception&) {
            return nlohmann::json::object();  // corrupt cache: start fresh
        }
    }

    std::string path_;
    mutable std::size_t hits_ = 0;
};

}  // namespace charpoly
