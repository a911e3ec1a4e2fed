#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "bsdkit/newform_store.hpp"

using namespace bsdkit;

static std::string fixture(const std::string& name) {
    return std::string(BSDKIT_FIXTURES_DIR) + "/" + name;
}

TEST_CASE("fixtures load and round-trip byte-identically") {
    namespace fs = std::filesystem;
    int nf = 0, cv = 0;
    for (const auto& entry : fs::directory_iterator(BSDKIT_FIXTURES_DIR)) {
        std::string path = entry.path().string();
        std::string name = entry.path().filename().string();
        if (name.starts_with("newform_")) {
            NewformRecord rec = load_newform(path);
            CHECK(serialize_newform(rec) == slurp_file(path));
            CHECK(validate_hecke(rec).ok);
            ++nf;
        } else if (name.starts_with("curve_")) {
            CurveRecord rec = load_curve(path);
            CHECK(serialize_curve(rec) == slurp_file(path));
            ++cv;
        }
    }
    CHECK(nf >= 21);
    CHECK(cv >= 7);
}

TEST_CASE("23a fixture contents") {
    NewformRecord rec = load_newform(fixture("newform_23a.json"));
    CHECK(rec.label == "23a");
    CHECK(rec.level == 23);
    CHECK(rec.order_disc == 5);
    CHECK(rec.coeff_bound == 1000);
    // a_ell present for all primes ell <= 1000
    for (long ell : primes_upto(1000)) CHECK(rec.eigenvalues.count(ell) == 1);
    CHECK_THROWS_AS(get_ap(rec, 1009), std::out_of_range);
}

TEST_CASE("35a eigenvalues match the published splitting data") {
    // the reducible splitting 1 + chi_2 at p_2' forces a_ell = 1 + ell mod p_2'
    NewformRecord rec = load_newform(fixture("newform_35a.json"));
    QuadOrder o(17);
    auto t2 = split_prime(o, 2);
    REQUIRE(t2.size() == 2);
    // a_5 and a_7 are the Atkin-Lehner eigenvalues at the bad primes
    CHECK(get_ap(rec, 5) == OrderElt(Int(1), Int(0)));
    CHECK(get_ap(rec, 7) == OrderElt(Int(-1), Int(0)));
}

TEST_CASE("validation failures") {
    // empty eigenvalue map
    Json j = {{"schema", kSchemaTag}, {"label", "x"},  {"level", 11},
              {"disc", 5},            {"coeff_bound", 10}, {"fricke", nullptr},
              {"ap", Json::array()}};
    CHECK_THROWS_WITH(newform_from_json(j, "test"),
                      Catch::Matchers::ContainsSubstring("insufficient coefficients"));
    // a_2 = 10 at disc 5 violates the Weil bound (10 > 2 sqrt 2)
    j["ap"] = Json::array({Json::array({2, 10, 0})});
    CHECK_THROWS_WITH(newform_from_json(j, "test"),
                      Catch::Matchers::ContainsSubstring("Weil bound"));
    // in-range value passes
    j["ap"] = Json::array({Json::array({2, 1, 0})});
    CHECK_NOTHROW(newform_from_json(j, "test"));
    // bad schema tag
    Json k = j;
    k["schema"] = "bsd-kit/0";
    CHECK_THROWS_WITH([&] { require_schema(k, "test"); }(),
                      Catch::Matchers::ContainsSubstring("schema"));
}

TEST_CASE("validate_hecke detects mutated records") {
    NewformRecord rec = load_newform(fixture("newform_39a.json"));
    QuadOrder o(rec.order_disc);
    std::map<long, Int> traces;
    for (const auto& [ell, a] : rec.eigenvalues) traces[ell] = elt_trace(o, a);
    CHECK(validate_hecke(rec, &traces).ok);
    // negate one coefficient: the trace side channel catches it
    NewformRecord bad = rec;
    bad.eigenvalues[11] = elt_neg(bad.eigenvalues[11]);
    if (elt_trace(o, rec.eigenvalues[11]) != 0) {
        auto rep = validate_hecke(bad, &traces);
        CHECK_FALSE(rep.ok);
        REQUIRE_FALSE(rep.failures.empty());
        CHECK(rep.failures[0].find("trace mismatch") != std::string::npos);
    }
    // bad-prime checks: a_3 must be +-1 for 3 || 39
    NewformRecord bad2 = rec;
    bad2.eigenvalues[3] = OrderElt(Int(2), Int(0));
    CHECK_FALSE(validate_hecke(bad2).ok);
}

TEST_CASE("hecke_an satisfies the multiplicative recurrences") {
    NewformRecord rec = load_newform(fixture("newform_23a.json"));
    QuadOrder o(rec.order_disc);
    // coprime multiplicativity
    for (auto [m, n] : {std::pair<long, long>{2, 3}, {4, 9}, {5, 49}, {6, 35}, {8, 11}}) {
        CHECK(hecke_an(rec, m * n) == elt_mul(o, hecke_an(rec, m), hecke_an(rec, n)));
    }
    // good-prime recurrence
    for (long ell : {2L, 3L, 5L, 7L}) {
        for (int k = 1; k <= 4; ++k) {
            long lk = 1;
            for (int i = 0; i < k; ++i) lk *= ell;
            OrderElt lhs = hecke_an(rec, lk * ell);
            OrderElt rhs = elt_sub(elt_mul(o, hecke_an(rec, ell), hecke_an(rec, lk)),
                                   elt_scale(Int(ell), hecke_an(rec, lk / ell)));
            CHECK(lhs == rhs);
        }
    }
    // bad prime: a_{23^k} = a_23^k
    OrderElt a23 = get_ap(rec, 23);
    CHECK(hecke_an(rec, 23L * 23) == elt_mul(o, a23, a23));
    CHECK(hecke_an(rec, 1) == OrderElt(Int(1), Int(0)));
}

TEST_CASE("curve records expose published invariants") {
    CurveRecord c = load_curve(fixture("curve_23a.json"));
    CHECK(c.torsion == 11);
    CHECK(c.rank_O == 0);
    REQUIRE(c.tamagawa.count(23) == 1);
    CHECK(c.tamagawa.at(23) == 11);
    REQUIRE(c.heegner.size() == 1);
    CHECK(c.heegner[0].D == -7);
    CHECK(c.heegner[0].index == 11);
    CHECK(ideal_norm(c.heegner[0].ideal) == 11);

    CurveRecord c3200 = load_curve(fixture("curve_3200a.json"));
    CHECK(c3200.rank_O == 0);
    REQUIRE(c3200.heegner.size() == 1);
    CHECK(c3200.heegner[0].D == -31);
    CHECK(c3200.heegner[0].index == 7);
    REQUIRE(c3200.external_certificates.size() == 1);
    CHECK(c3200.external_certificates[0].scope == "2-primary");
}
