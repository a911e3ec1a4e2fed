// Loading, validation, and canonical serialization of newform eigenvalue
// records and curve-invariant records (JSON fixtures derived from published
// modular-form data).
#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdkit/quad_order.hpp"

namespace bsdkit {

using Json = nlohmann::ordered_json;

constexpr const char* kSchemaTag = "bsd-kit/1";

// Minimal-quadratic-twist data at a prime ell with ell^2 | N, ingested from
// the fixture rather than computed: v_twist_level is v_ell of the level of
// the minimal quadratic twist f~, a_twist is a_ell(f~) on the basis (1, w)
// of Z[f], and abelian_sign is the sign s in the primitive symmetric-square
// factor 1 + s*ell*T when v_twist_level == 2 (s = -1 exactly when the local
// Galois image at ell is abelian); null when unknown.
struct TwistData {
    long ell = 0;
    long v_twist_level = 0;
    OrderElt a_twist;
    std::optional<int> abelian_sign;
};

struct NewformRecord {
    std::string label;
    long level = 0;
    long order_disc = 0;  // discriminant of Z[f]
    long coeff_bound = 0;
    std::optional<int> fricke;  // Fricke eigenvalue, if recorded
    std::map<long, OrderElt> eigenvalues;
    std::map<long, TwistData> twists;  // keyed by ell, only for ell^2 | N

    QuadOrder order() const { return QuadOrder(order_disc); }
};

struct HeegnerEntry {
    long D = 0;        // imaginary quadratic discriminant D_K
    long index = 0;    // I_{K,pi}
    IdealHNF ideal;    // the ideal I_{K,pi} as an HNF lattice
    long index_K_Q = 1;
    long u_K = 1;
};

struct ExternalCertificate {
    std::string scope, statement, source;
};

struct CurveRecord {
    std::string label;
    long level = 0;
    long disc_end = 0;  // discriminant of End(J)
    long torsion = 1;
    long rank_O = 0;
    std::map<long, long> tamagawa;
    std::optional<IdealHNF> tamagawa_ideal;
    long real_two_torsion = 0;
    Rat cf_cpi = 1;
    long deg_pi = 1;
    long d_f = 1;
    std::vector<HeegnerEntry> heegner;
    std::vector<ExternalCertificate> external_certificates;
};

// ---------------------------------------------------------------------------
// validation

// exact check that both real embeddings of a satisfy sigma(a)^2 <= 4*ell:
// with t = 4*ell - a^2, both embeddings of t are >= 0 iff tr(t) >= 0 and
// N(t) >= 0.
inline bool weil_bound_ok(const QuadOrder& o, const OrderElt& a, long ell) {
    OrderElt t = elt_sub(OrderElt(Int(4) * ell, Int(0)), elt_mul(o, a, a));
    return elt_trace(o, t) >= 0 && elt_norm(o, t) >= 0;
}

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> failures;
    void fail(std::string msg) {
        ok = false;
        failures.push_back(std::move(msg));
    }
};

inline ValidationReport validate_hecke(
    const NewformRecord& rec,
    const std::map<long, Int>* rational_traces = nullptr) {
    ValidationReport rep;
    QuadOrder o = rec.order();
    for (const auto& [ell, a] : rec.eigenvalues) {
        if (rec.level % ell != 0) {
            if (!weil_bound_ok(o, a, ell))
                rep.fail("Weil bound violated at ell = " + std::to_string(ell));
        } else {
            long v = 0, nn = rec.level;
            while (nn % ell == 0) {
                nn /= ell;
                ++v;
            }
            if (v == 1) {
                if (a.y != 0 || (a.x != 1 && a.x != -1))
                    rep.fail("U_ell eigenvalue not +-1 at ell = " + std::to_string(ell) +
                             " (ell || N)");
            } else {
                if (!a.is_zero())
                    rep.fail("U_ell eigenvalue nonzero at ell = " + std::to_string(ell) +
                             " (ell^2 | N)");
            }
        }
        if (rational_traces) {
            auto it = rational_traces->find(ell);
            if (it != rational_traces->end() && elt_trace(o, a) != it->second)
                rep.fail("trace mismatch at ell = " + std::to_string(ell));
        }
    }
    return rep;
}

// eigenvalue access; throws if the fixture does not reach ell
inline const OrderElt& get_ap(const NewformRecord& rec, long ell) {
    auto it = rec.eigenvalues.find(ell);
    if (it == rec.eigenvalues.end())
        throw std::out_of_range("insufficient coefficients: a_" + std::to_string(ell) +
                                " missing in " + rec.label);
    return it->second;
}

// Hecke expansion to composite indices: a_{mn} = a_m a_n for coprime (m, n);
// a_{ell^{k+1}} = a_ell a_{ell^k} - ell a_{ell^{k-1}} at good ell;
// a_{ell^k} = a_ell^k at bad ell.
inline OrderElt hecke_an(const NewformRecord& rec, long n) {
    QuadOrder o = rec.order();
    if (n <= 0) throw std::invalid_argument("hecke_an: n must be positive");
    OrderElt out(Int(1), Int(0));
    for (auto [ell, k] : factorize(n)) {
        const OrderElt& a = get_ap(rec, ell);
        OrderElt prev(Int(1), Int(0));
        OrderElt cur = a;
        if (rec.level % ell == 0) {
            cur = a;
            for (int j = 2; j <= k; ++j) cur = elt_mul(o, cur, a);
        } else {
            for (int j = 2; j <= k; ++j) {
                OrderElt next = elt_sub(elt_mul(o, a, cur), elt_scale(Int(ell), prev));
                prev = cur;
                cur = next;
            }
        }
        out = elt_mul(o, out, cur);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON input

inline Json parse_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
    return j;
}

inline void require_schema(const Json& j, const std::string& path) {
    if (!j.contains("schema") || j["schema"] != kSchemaTag)
        throw std::runtime_error("missing or wrong schema tag in " + path);
}

inline NewformRecord newform_from_json(const Json& j, const std::string& origin) {
    NewformRecord rec;
    try {
        rec.label = j.at("label").get<std::string>();
        rec.level = j.at("level").get<long>();
        rec.order_disc = j.at("disc").get<long>();
        rec.coeff_bound = j.at("coeff_bound").get<long>();
        if (!j.at("fricke").is_null()) rec.fricke = j.at("fricke").get<int>();
        for (const auto& row : j.at("ap")) {
            if (!row.is_array() || row.size() != 3)
                throw std::runtime_error("bad ap row");
            long ell = row[0].get<long>();
            rec.eigenvalues[ell] =
                OrderElt(Int(row[1].get<long>()), Int(row[2].get<long>()));
        }
        if (j.contains("twist")) {
            for (const auto& t : j["twist"]) {
                TwistData td;
                td.ell = t.at("ell").get<long>();
                td.v_twist_level = t.at("v_twist_level").get<long>();
                const auto& at = t.at("a_twist");
                td.a_twist = OrderElt(Int(at.at(0).get<long>()),
                                      Int(at.at(1).get<long>()));
                if (!t.at("abelian_sign").is_null())
                    td.abelian_sign = t.at("abelian_sign").get<int>();
                rec.twists[td.ell] = td;
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("schema violation in " + origin + ": " + e.what());
    }
    if (rec.level <= 0) throw std::runtime_error("nonpositive level in " + origin);
    QuadOrder o(rec.order_disc);  // validates disc
    if (rec.eigenvalues.empty())
        throw std::runtime_error("insufficient coefficients in " + origin);
    for (const auto& [ell, a] : rec.eigenvalues) {
        if (!is_prime(ell))
            throw std::runtime_error("composite ap index in " + origin);
        if (rec.level % ell != 0 && !weil_bound_ok(o, a, ell))
            throw std::runtime_error("Weil bound violated at ell = " + std::to_string(ell) +
                                     " in " + origin);
    }
    for (const auto& [ell, td] : rec.twists) {
        if (rec.level % (ell * ell) != 0)
            throw std::runtime_error("twist data at ell with ell^2 coprime to N in " +
                                     origin);
        if (td.v_twist_level < 0 || td.v_twist_level > 30)
            throw std::runtime_error("twist level valuation out of range in " + origin);
        if (td.abelian_sign && *td.abelian_sign != 1 && *td.abelian_sign != -1)
            throw std::runtime_error("abelian_sign must be +-1 in " + origin);
    }
    return rec;
}

inline NewformRecord load_newform(const std::string& path) {
    Json j = parse_json_file(path);
    require_schema(j, path);
    return newform_from_json(j, path);
}

inline IdealHNF ideal_from_json_triple(const Json& arr) {
    if (!arr.is_array() || arr.size() != 3) throw std::runtime_error("bad ideal triple");
    IdealHNF I;
    I.a = Int(arr[0].get<long>());
    I.b = Int(arr[1].get<long>());
    I.d = Int(arr[2].get<long>());
    if (I.a <= 0 || I.d <= 0 || I.b < 0 || I.b >= I.a)
        throw std::runtime_error("ideal triple not in HNF");
    return I;
}

inline CurveRecord curve_from_json(const Json& j, const std::string& origin) {
    CurveRecord rec;
    try {
        rec.label = j.at("label").get<std::string>();
        rec.level = j.at("level").get<long>();
        rec.disc_end = j.at("disc_end").get<long>();
        rec.torsion = j.at("torsion").get<long>();
        rec.rank_O = j.at("rank_O").get<long>();
        for (const auto& [k, v] : j.at("tamagawa").items())
            rec.tamagawa[std::stol(k)] = v.get<long>();
        if (j.contains("tamagawa_ideal"))
            rec.tamagawa_ideal = ideal_from_json_triple(j["tamagawa_ideal"]);
        rec.real_two_torsion = j.at("real_two_torsion").get<long>();
        const auto& cf = j.at("cf_cpi");
        rec.cf_cpi = Rat(Int(cf.at(0).get<long>()), Int(cf.at(1).get<long>()));
        rec.cf_cpi.canonicalize();
        rec.deg_pi = j.at("deg_pi").get<long>();
        rec.d_f = j.at("d_f").get<long>();
        for (const auto& h : j.at("heegner")) {
            HeegnerEntry e;
            e.D = h.at("D").get<long>();
            e.index = h.at("index").get<long>();
            e.ideal = ideal_from_json_triple(h.at("ideal"));
            e.index_K_Q = h.at("index_K_Q").get<long>();
            e.u_K = h.at("u_K").get<long>();
            rec.heegner.push_back(std::move(e));
        }
        if (j.contains("external_certificates"))
            for (const auto& c : j["external_certificates"])
                rec.external_certificates.push_back(
                    {c.at("scope").get<std::string>(), c.at("statement").get<std::string>(),
                     c.at("source").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("schema violation in " + origin + ": " + e.what());
    }
    if (rec.torsion < 1 || rec.rank_O < 0 || rec.deg_pi < 1 || rec.d_f < 1)
        throw std::runtime_error("invalid invariant ranges in " + origin);
    for (auto [p, c] : rec.tamagawa)
        if (c < 1) throw std::runtime_error("Tamagawa number < 1 in " + origin);
    // real_two_torsion in {2^g, ..., 4^g}, divisible by 2^g (g = 2); for the
    // elliptic newform-level records g = 1 values also occur, so accept any
    // power of two between 2 and 16
    long rt = rec.real_two_torsion;
    if (rt < 1 || (rt & (rt - 1)) != 0 || rt > 16)
        throw std::runtime_error("real_two_torsion not a small power of 2 in " + origin);
    if (rec.cf_cpi <= 0) throw std::runtime_error("cf_cpi must be positive in " + origin);
    return rec;
}

inline CurveRecord load_curve(const std::string& path) {
    Json j = parse_json_file(path);
    require_schema(j, path);
    return curve_from_json(j, path);
}

// ---------------------------------------------------------------------------
// canonical serialization (byte-identical round trips for fixtures)

namespace detail {

class CanonicalWriter {
  public:
    std::string str() const { return out_; }
    void open_obj() { punct("{"); stack_.push_back(true); first_ = true; }
    void close_obj() { close("}"); }
    void open_arr() { punct("["); stack_.push_back(false); first_ = true; }
    void close_arr() { close("]"); }
    void key(const std::string& k) {
        sep();
        out_ += quote(k) + ": ";
        pending_value_ = true;
    }
    void value(const std::string& raw) {
        if (!pending_value_) sep();
        pending_value_ = false;
        out_ += raw;
    }
    void value_str(const std::string& s) { value(quote(s)); }
    void value_int(const Int& v) { value(v.get_str()); }
    void value_int(long v) { value(std::to_string(v)); }
    void value_null() { value("null"); }

  private:
    static std::string quote(const std::string& s) {
        std::string q = "\"";
        for (char c : s) {
            if (c == '"' || c == '\\') q += '\\';
            q += c;
        }
        return q + "\"";
    }
    void indent() { out_.append(stack_.size(), ' '); }
    void sep() {
        if (!first_) out_ += ",";
        out_ += "\n";
        indent();
        first_ = false;
    }
    void punct(const std::string& s) {
        if (pending_value_) {
            pending_value_ = false;
        } else if (!stack_.empty()) {
            sep();
        }
        out_ += s;
        nonempty_.push_back(false);
    }
    void close(const std::string& s) {
        bool was_first = first_;
        stack_.pop_back();
        nonempty_.pop_back();
        if (!was_first) {
            out_ += "\n";
            indent();
        }
        out_ += s;
        first_ = false;
    }
    std::string out_;
    std::vector<bool> stack_;
    std::vector<bool> nonempty_;
    bool first_ = true;
    bool pending_value_ = false;
};

}  // namespace detail

inline std::string serialize_newform(const NewformRecord& rec) {
    detail::CanonicalWriter w;
    w.open_obj();
    w.key("schema");
    w.value_str(kSchemaTag);
    w.key("label");
    w.value_str(rec.label);
    w.key("level");
    w.value_int(rec.level);
    w.key("disc");
    w.value_int(rec.order_disc);
    w.key("coeff_bound");
    w.value_int(rec.coeff_bound);
    w.key("fricke");
    if (rec.fricke)
        w.value_int(static_cast<long>(*rec.fricke));
    else
        w.value_null();
    w.key("ap");
    w.open_arr();
    for (const auto& [ell, a] : rec.eigenvalues) {
        w.open_arr();
        w.value_int(ell);
        w.value_int(a.x);
        w.value_int(a.y);
        w.close_arr();
    }
    w.close_arr();
    if (!rec.twists.empty()) {
        w.key("twist");
        w.open_arr();
        for (const auto& [ell, td] : rec.twists) {
            w.open_obj();
            w.key("ell");
            w.value_int(td.ell);
            w.key("v_twist_level");
            w.value_int(td.v_twist_level);
            w.key("a_twist");
            w.open_arr();
            w.value_int(td.a_twist.x);
            w.value_int(td.a_twist.y);
            w.close_arr();
            w.key("abelian_sign");
            if (td.abelian_sign)
                w.value_int(static_cast<long>(*td.abelian_sign));
            else
                w.value_null();
            w.close_obj();
        }
        w.close_arr();
    }
    w.close_obj();
    return w.str() + "\n";
}

inline std::string serialize_curve(const CurveRecord& rec) {
    detail::CanonicalWriter w;
    w.open_obj();
    w.key("schema");
    w.value_str(kSchemaTag);
    w.key("label");
    w.value_str(rec.label);
    w.key("level");
    w.value_int(rec.level);
    w.key("disc_end");
    w.value_int(rec.disc_end);
    w.key("torsion");
    w.value_int(rec.torsion);
    w.key("rank_O");
    w.value_int(rec.rank_O);
    w.key("tamagawa");
    w.open_obj();
    for (auto [p, c] : rec.tamagawa) {
        w.key(std::to_string(p));
        w.value_int(c);
    }
    w.close_obj();
    if (rec.tamagawa_ideal) {
        w.key("tamagawa_ideal");
        w.open_arr();
        w.value_int(rec.tamagawa_ideal->a);
        w.value_int(rec.tamagawa_ideal->b);
        w.value_int(rec.tamagawa_ideal->d);
        w.close_arr();
    }
    w.key("real_two_torsion");
    w.value_int(rec.real_two_torsion);
    w.key("cf_cpi");
    w.open_arr();
    w.value_int(Int(rec.cf_cpi.get_num()));
    w.value_int(Int(rec.cf_cpi.get_den()));
    w.close_arr();
    w.key("deg_pi");
    w.value_int(rec.deg_pi);
    w.key("d_f");
    w.value_int(rec.d_f);
    w.key("heegner");
    w.open_arr();
    for (const auto& h : rec.heegner) {
        w.open_obj();
        w.key("D");
        w.value_int(h.D);
        w.key("index");
        w.value_int(h.index);
        w.key("ideal");
        w.open_arr();
        w.value_int(h.ideal.a);
        w.value_int(h.ideal.b);
        w.value_int(h.ideal.d);
        w.close_arr();
        w.key("index_K_Q");
        w.value_int(h.index_K_Q);
        w.key("u_K");
        w.value_int(h.u_K);
        w.close_obj();
    }
    w.close_arr();
    if (!rec.external_certificates.empty()) {
        w.key("external_certificates");
        w.open_arr();
        for (const auto& c : rec.external_certificates) {
            w.open_obj();
            w.key("scope");
            w.value_str(c.scope);
            w.key("statement");
            w.value_str(c.statement);
            w.key("source");
            w.value_str(c.source);
            w.close_obj();
        }
        w.close_arr();
    }
    w.close_obj();
    return w.str() + "\n";
}

inline std::string slurp_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace bsdkit
