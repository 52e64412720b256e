#include "triq/record.hpp"

#include <sstream>

namespace triq {

namespace {

const char* alpha_str(AlphaValue v) {
    switch (v) {
        case AlphaValue::zero: return "0";
        case AlphaValue::one: return "1";
        case AlphaValue::unresolved: return "unresolved";
    }
    return "?";
}

std::string sqrt_case_str(const std::optional<SqrtCase>& c) {
    return c ? to_string(*c) : std::string("-");
}

}  // namespace

nlohmann::ordered_json ResultRecord::to_json() const {
    const Classification& c = report.cls;
    nlohmann::ordered_json j;
    j["p"] = c.p.get_str();
    j["q"] = c.q.get_str();
    j["p_mod8"] = c.p_mod8;
    j["q_mod8"] = c.q_mod8;
    j["legendre_pq"] = c.legendre_pq;
    j["theorem"] = c.full_label();
    if (c.norm_eps_2p) j["norm_eps_2p"] = *c.norm_eps_2p;
    j["x_case"] = sqrt_case_str(c.x_case);
    j["v_case"] = sqrt_case_str(c.v_case);
    if (c.u_sign) j["u_sign"] = *c.u_sign;

    nlohmann::ordered_json bits = nlohmann::ordered_json::object();
    for (const auto& [name, v] : c.alpha_bits) bits[name] = alpha_str(v);
    j["alpha_bits"] = bits;

    nlohmann::ordered_json sub = nlohmann::ordered_json::object();
    for (const auto& [d, h] : report.subfield_h2) sub[d.get_str()] = h.get_str();
    j["subfield_h2"] = sub;

    j["resolved"] = report.resolved;
    if (report.resolved) {
        j["q_index"] = report.q_index.get_str();
        j["h2_K"] = report.h2_K.get_str();
    } else {
        nlohmann::ordered_json qc = nlohmann::ordered_json::array();
        for (const Int& v : report.q_index_candidates) qc.push_back(v.get_str());
        nlohmann::ordered_json hc = nlohmann::ordered_json::array();
        for (const Int& v : report.h2_candidates) hc.push_back(v.get_str());
        j["q_index_candidates"] = qc;
        j["h2_K_candidates"] = hc;
    }
    j["structure"] = to_string(report.structure);
    j["kuroda_consistent"] = report.kuroda_consistent;

    nlohmann::ordered_json gens = nlohmann::ordered_json::array();
    for (const UnitSymbol& g : report.generators) {
        nlohmann::ordered_json e = nlohmann::ordered_json::array();
        for (const Rat& x : g.exponents) e.push_back(x.get_str());
        gens.push_back({{"label", g.label}, {"exponents", e}, {"sign", g.sign}});
    }
    j["generators"] = gens;

    nlohmann::ordered_json certs = nlohmann::ordered_json::array();
    for (const std::string& s : report.certificates) certs.push_back(s);
    j["certificates"] = certs;
    j["denom_bound"] = denom_bound.get_str();
    j["max_precision"] = max_precision;
    if (wall_time_ms) j["wall_time_ms"] = *wall_time_ms;
    return j;
}

std::string ResultRecord::to_json_line() const { return to_json().dump(); }

std::string ResultRecord::csv_header() {
    return "p,q,p_mod8,q_mod8,legendre_pq,theorem,norm_eps_2p,x_case,v_case,u_sign,"
           "alpha_bits,h2_2,h2_p,h2_q,h2_2p,h2_2q,h2_pq,h2_2pq,resolved,q_index,h2_K,"
           "structure,kuroda_consistent,denom_bound,max_precision";
}

std::string ResultRecord::to_csv_row() const {
    const Classification& c = report.cls;
    std::ostringstream os;
    os << c.p.get_str() << ',' << c.q.get_str() << ',' << c.p_mod8 << ',' << c.q_mod8 << ','
       << c.legendre_pq << ',' << c.full_label() << ','
       << (c.norm_eps_2p ? std::to_string(*c.norm_eps_2p) : std::string("-")) << ','
       << sqrt_case_str(c.x_case) << ',' << sqrt_case_str(c.v_case) << ','
       << (c.u_sign ? std::to_string(*c.u_sign) : std::string("-")) << ',';
    bool first = true;
    os << '"';
    for (const auto& [name, v] : c.alpha_bits) {
        if (!first) os << ';';
        os << name << '=' << alpha_str(v);
        first = false;
    }
    os << '"' << ',';
    const Int& p = c.p;
    const Int& q = c.q;
    for (const Int& d : {Int(2), p, q, Int(2 * p), Int(2 * q), Int(p * q), Int(2 * p * q)})
        os << report.subfield_h2.at(d).get_str() << ',';
    os << (report.resolved ? "1" : "0") << ',';
    if (report.resolved)
        os << report.q_index.get_str() << ',' << report.h2_K.get_str() << ',';
    else {
        os << '"';
        for (size_t i = 0; i < report.q_index_candidates.size(); ++i)
            os << (i ? ";" : "") << report.q_index_candidates[i].get_str();
        os << '"' << ',' << '"';
        for (size_t i = 0; i < report.h2_candidates.size(); ++i)
            os << (i ? ";" : "") << report.h2_candidates[i].get_str();
        os << '"' << ',';
    }
    os << to_string(report.structure) << ',' << (report.kuroda_consistent ? "1" : "0") << ','
       << denom_bound.get_str() << ',' << max_precision;
    return os.str();
}

ResultRecord make_record(const UnitGroupReport& report, const SquareTestConfig& cfg) {
    ResultRecord rec;
    rec.report = report;
    rec.denom_bound =
        cfg.denom_bound.value_or(Int(16 * report.cls.p * report.cls.q));
    rec.max_precision = cfg.max_precision;
    return rec;
}

std::string format_text_report(const ResultRecord& rec) {
    const UnitGroupReport& r = rec.report;
    const Classification& c = r.cls;
    std::ostringstream os;
    os << "K = Q(sqrt2, sqrt" << c.p.get_str() << ", sqrt" << c.q.get_str() << ")\n";
    os << "case:        " << c.full_label() << "\n";
    os << "congruences: p = " << c.p_mod8 << " mod 8, q = " << c.q_mod8
       << " mod 8, (p|q) = " << (c.legendre_pq > 0 ? "+1" : "-1") << "\n";
    if (c.norm_eps_2p)
        os << "N(eps_2p) =  " << (*c.norm_eps_2p > 0 ? "+1" : "-1") << "\n";
    if (c.x_case) os << "x case:      " << to_string(*c.x_case) << "\n";
    if (c.v_case) os << "v case:      " << to_string(*c.v_case) << "\n";
    if (c.u_sign) os << "u:           " << *c.u_sign << "\n";
    for (const auto& [name, v] : c.alpha_bits)
        os << "bit " << name << ":   " << alpha_str(v) << "\n";
    os << "subfield h2: ";
    bool first = true;
    for (const auto& [d, h] : r.subfield_h2) {
        if (!first) os << ", ";
        os << "h2(" << d.get_str() << ")=" << h.get_str();
        first = false;
    }
    os << "\n";
    if (r.resolved) {
        os << "q(K):        " << r.q_index.get_str() << "\n";
        os << "h2(K):       " << r.h2_K.get_str() << "\n";
    } else {
        os << "h2(K):       unresolved, candidates {";
        for (size_t i = 0; i < r.h2_candidates.size(); ++i)
            os << (i ? ", " : "") << r.h2_candidates[i].get_str();
        os << "}\n";
    }
    os << "structure:   " << to_string(r.structure) << "\n";
    os << "Kuroda:      " << (r.kuroda_consistent ? "consistent" : "NOT CONSISTENT") << "\n";
    os << "generators (mod -1):\n";
    for (const UnitSymbol& g : r.generators) os << "  " << g.label << "\n";
    for (const std::string& s : r.certificates) os << "note: " << s << "\n";
    return os.str();
}

}  // namespace triq
