// triq: unit groups and 2-class numbers of Q(sqrt2, sqrt p, sqrt q),
// with exact Pell / form-class / field arithmetic underneath.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "triq/record.hpp"

namespace {

using namespace triq;

struct GlobalOpts {
    std::string cache_path;
    std::string config_path;
    std::string denom_bound_str;
    long max_precision = 0;
    unsigned jobs = 0;

    SquareTestConfig square_cfg;
    std::unique_ptr<UnitCache> cache;

    void finalize() {
        // config file first, flags override
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw CLI::ValidationError("--config", "cannot open " + config_path);
            nlohmann::json j = nlohmann::json::parse(in);
            if (j.contains("denom_bound") && denom_bound_str.empty())
                denom_bound_str = j["denom_bound"].get<std::string>();
            if (j.contains("max_precision") && max_precision == 0)
                max_precision = j["max_precision"].get<long>();
            if (j.contains("cache") && cache_path.empty())
                cache_path = j["cache"].get<std::string>();
        }
        if (cache_path.empty())
            if (const char* env = std::getenv("TRIQUAD_CACHE")) cache_path = env;
        if (!denom_bound_str.empty()) square_cfg.denom_bound = Int(denom_bound_str);
        if (max_precision > 0) square_cfg.max_precision = max_precision;
        if (!cache_path.empty()) cache = std::make_unique<UnitCache>(cache_path);
        if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    }
};

std::vector<Int> odd_primes_upto(const Int& bound) {
    std::vector<Int> out;
    for (Int n = 3; n <= bound; n += 2)
        if (is_prime(n)) out.push_back(n);
    return out;
}

int exit_code_for(const ResultRecord& rec) {
    if (!rec.report.kuroda_consistent && rec.report.resolved) return 4;
    if (!rec.report.resolved) return 3;
    return 0;
}

int cmd_classify(GlobalOpts& g, const std::string& ps, const std::string& qs,
                 const std::string& format) {
    Int p(ps), q(qs);
    auto t0 = std::chrono::steady_clock::now();
    Classification c = classify(p, q, g.cache.get());
    if (c.theorem == CaseLabel::unsupported) {
        std::cerr << "unsupported: " << c.note << "\n";
        return 2;
    }
    UnitGroupReport rep = unit_group(c, g.square_cfg, g.cache.get());
    ResultRecord rec = make_record(rep, g.square_cfg);
    rec.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
    if (format == "json")
        std::cout << rec.to_json_line() << "\n";
    else
        std::cout << format_text_report(rec);
    if (!rep.kuroda_consistent && rep.resolved) {
        std::cerr << "error: class number formula mismatch for (" << ps << "," << qs << ")\n";
        return 4;
    }
    return exit_code_for(rec);
}

int cmd_scan(GlobalOpts& g, const Int& p_max, const Int& q_max, const std::string& out_path,
             const std::string& filter, const std::string& format) {
    std::vector<Int> ps = odd_primes_upto(p_max);
    std::vector<Int> qs = odd_primes_upto(q_max);
    std::vector<std::pair<Int, Int>> pairs;
    for (const Int& p : ps)
        for (const Int& q : qs)
            if (p != q) pairs.emplace_back(p, q);

    struct Row {
        bool supported = false;
        bool type22 = false;
        ResultRecord rec;
    };
    std::vector<Row> rows(pairs.size());
    std::atomic<size_t> next{0};
    std::atomic<bool> kuroda_failure{false};

    auto worker = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= pairs.size()) return;
            const auto& [p, q] = pairs[i];
            Classification c = classify(p, q, g.cache.get());
            if (c.theorem == CaseLabel::unsupported) continue;
            UnitGroupReport rep = unit_group(c, g.square_cfg, g.cache.get());
            rows[i].supported = true;
            rows[i].type22 = type22_check(rep.cls, rep);
            rows[i].rec = make_record(rep, g.square_cfg);
            if (rep.resolved && !rep.kuroda_consistent) kuroda_failure = true;
        }
    };
    std::vector<std::thread> threads;
    for (unsigned t = 0; t < g.jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "error: cannot open output file " << out_path << "\n";
            return 1;
        }
        out = &file;
    }

    std::map<std::string, int> by_theorem;
    std::map<std::string, int> by_structure;
    int unresolved = 0, emitted = 0;
    if (format == "csv") *out << ResultRecord::csv_header() << "\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        if (!rows[i].supported) continue;
        const ResultRecord& rec = rows[i].rec;
        if (!filter.empty()) {
            if (filter == "type22") {
                if (!rows[i].type22) continue;
            } else if (rec.report.cls.full_label().rfind(filter, 0) != 0 &&
                       to_string(rec.report.cls.theorem) != filter) {
                continue;
            }
        }
        ++by_theorem[to_string(rec.report.cls.theorem)];
        ++by_structure[to_string(rec.report.structure)];
        if (!rec.report.resolved) ++unresolved;
        *out << (format == "csv" ? rec.to_csv_row() : rec.to_json_line()) << "\n";
        ++emitted;
    }
    if (!out_path.empty() && !file.good()) {
        std::cerr << "error: partial output, write failed for " << out_path << "\n";
        return 1;
    }

    std::cerr << "scanned " << pairs.size() << " pairs, " << emitted << " records\n";
    std::cerr << "by case:";
    for (auto& [k, v] : by_theorem) std::cerr << " " << k << "=" << v;
    std::cerr << "\nby structure:";
    for (auto& [k, v] : by_structure) std::cerr << " " << k << "=" << v;
    std::cerr << "\nunresolved: " << unresolved << "\n";
    if (kuroda_failure) {
        std::cerr << "error: class number formula mismatch in at least one record\n";
        return 4;
    }
    return 0;
}

int cmd_h2(const std::string& ds) {
    Int d(ds);
    Int value = h2(d);
    std::cout << value.get_str() << "\n";
    if (auto shape = detect_shape(d)) {
        if (auto fast = h2_fast(d, *shape)) {
            std::cerr << (*fast == value ? "fast path agrees" : "FAST PATH DISAGREES") << "\n";
            if (*fast != value) return 4;
        } else {
            std::cerr << "fast path: divisible by 4 only\n";
        }
    }
    return 0;
}

int cmd_unit(GlobalOpts& g, const std::string& ds) {
    Int d(ds);
    QuadUnit u = fundamental_unit_cached(d, g.cache.get());
    std::cout << "(" << u.a.get_str() << " + " << u.b.get_str() << "*sqrt" << u.d.get_str()
              << ")/" << u.denom << ", norm " << (u.norm > 0 ? "+1" : "-1") << ", "
              << mpz_sizeinbase(u.a.get_mpz_t(), 10) << " digits, period " << u.cf_period
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"unit groups and 2-class numbers of triquadratic fields Q(sqrt2,sqrt p,sqrt q)"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--cache", g.cache_path, "unit cache file (env TRIQUAD_CACHE)");
    app.add_option("--config", g.config_path, "JSON config file");
    app.add_option("--denom-bound", g.denom_bound_str, "square test denominator bound");
    app.add_option("--max-precision", g.max_precision, "square test precision ceiling (bits)");
    app.add_option("--jobs", g.jobs, "scan worker threads");

    std::string ps, qs, ds, out_path, filter;
    std::string format = "text";
    std::string p_max = "100", q_max = "100";

    CLI::App* c_classify = app.add_subcommand("classify", "classify one pair (p, q)");
    c_classify->add_option("--p", ps, "prime p")->required();
    c_classify->add_option("--q", qs, "prime q")->required();
    c_classify->add_option("--format", format, "text | json");

    CLI::App* c_scan = app.add_subcommand("scan", "sweep all pairs up to the bounds");
    c_scan->add_option("--p-max", p_max, "p bound");
    c_scan->add_option("--q-max", q_max, "q bound");
    c_scan->add_option("--out", out_path, "output file (default stdout)");
    c_scan->add_option("--filter", filter, "case label (e.g. Thm3.5) or type22");
    std::string scan_format = "json";
    c_scan->add_option("--format", scan_format, "json | csv");

    CLI::App* c_h2 = app.add_subcommand("h2", "2-class number of Q(sqrt d)");
    c_h2->add_option("--d", ds, "squarefree d")->required();

    CLI::App* c_unit = app.add_subcommand("unit", "fundamental unit of Q(sqrt d)");
    c_unit->add_option("--d", ds, "squarefree d, d >= 2")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        g.finalize();
        if (c_classify->parsed()) return cmd_classify(g, ps, qs, format);
        if (c_scan->parsed()) return cmd_scan(g, Int(p_max), Int(q_max), out_path, filter,
                                              scan_format);
        if (c_h2->parsed()) return cmd_h2(ds);
        if (c_unit->parsed()) return cmd_unit(g, ds);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
