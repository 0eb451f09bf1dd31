#include "helpers.hpp"

#include <sstream>

using namespace mll;
using namespace testing;

namespace {

Table parse(const std::string& text, const FactorSpace* s = nullptr) {
    std::istringstream in(text);
    return parse_counts_csv(in, s);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const SpecificationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("counts CSV") {
    auto t = parse("# comment\nX,Y,count\n0,0,30\n0,1,10\n1,0,10\n1,1,30\n");
    CHECK(t.kind == TableKind::Counts);
    CHECK(t.values == std::vector<double>{30, 10, 10, 30});
    CHECK(t.space.variable(1).name == "Y");

    auto sparse = parse("X,Y,count\n1,1,5\n");
    CHECK(sparse.values == std::vector<double>{0, 0, 0, 5});

    auto s = space_of({{"X", 3}, {"Y", 2}});
    auto swapped = parse("Y,count,X\n1,4,2\n0,1,0\n", &s);
    CHECK(swapped.values == std::vector<double>{1, 0, 0, 0, 0, 4});
}

TEST_CASE("counts CSV errors name the line") {
    CHECK(error_of("X,Y,n\n0,0,1\n").find("count") != std::string::npos);
    CHECK(error_of("X,Y,count\n0,0,1\n0,1\n").find("line 3") != std::string::npos);
    CHECK(error_of("X,Y,count\n0,0,1\n0,0,2\n").find("duplicate") != std::string::npos);
    CHECK(error_of("X,Y,count\n0,a,1\n").find("line 2") != std::string::npos);
    CHECK(error_of("X,Y,count\n0,0,-1\n").find("line 2") != std::string::npos);
    CHECK(error_of("").find("empty") != std::string::npos);
    auto s = space_of({{"X", 2}, {"Y", 2}});
    CHECK_THROWS_AS(parse("X,Y,count\n2,0,1\n", &s), SpecificationError);
    CHECK_THROWS_AS(parse("X,Z,count\n0,0,1\n", &s), SpecificationError);
}

TEST_CASE("counts CSV round trip") {
    Rng rng(1);
    auto s = space_of({{"X", 3}, {"W", 2}, {"Y", 2}});
    auto n = simulate(random_positive_table(s, rng), 1000, 2);
    std::ostringstream out;
    write_counts_csv(out, n);
    CHECK(parse(out.str(), &s).values == n.values);
}

TEST_CASE("model spec JSON") {
    auto f = parse_model_json(R"({"variables": [{"name": "X", "levels": 2}, {"name": "Y", "levels": 2}],
                                  "terms": "saturated"})");
    REQUIRE(f.model);
    CHECK(count_dof(*f.model) == 0);
    CHECK_FALSE(f.roles);

    auto g = parse_model_json(R"({"variables": [{"name": "X", "levels": 2}, {"name": "Y", "levels": 2}],
                                  "theta": [0.1, 0.2, 0.3]})");
    REQUIRE(g.theta);
    CHECK(g.theta->values(2) == 0.3);

    auto h = parse_model_json(R"({"variables": [{"name": "X", "levels": 3}, {"name": "W", "levels": 3},
                                                {"name": "Y", "levels": 2}],
                                  "roles": {"exposure": "X", "mediator": "W", "response": "Y"},
                                  "terms": "prop3", "deleted_level": [1]})");
    REQUIRE(h.model);
    CHECK(h.model->mll.parameter_count() == 17);
    CHECK(h.model->mll.terms.back().deleted.front()[1] == 1);

    auto lin = parse_model_json(R"({"variables": [{"name": "X", "levels": 4}, {"name": "Y", "levels": 2}],
                                    "coding": "Ac",
                                    "terms": [{"margin": ["X", "Y"], "effects": [["X"], ["Y"], ["X", "Y"]]}],
                                    "linear_constraints": [{"constant_in": "X", "effect": ["X", "Y"]}]})");
    REQUIRE(lin.model);
    CHECK(count_dof(*lin.model) == 2);

    auto zl = parse_model_json(R"({"variables": [{"name": "X", "levels": 3}, {"name": "Y", "levels": 2}],
                                   "terms": "saturated",
                                   "zero_constraints": [{"effect": ["Y", "X"], "levels": [[1, 2]]}]})");
    REQUIRE(zl.model);
    REQUIRE(zl.model->zero_constraints.size() == 1);
    CHECK(zl.model->zero_constraints[0] == 4);

    CHECK_THROWS_AS(parse_model_json("{not json"), SpecificationError);
    CHECK_THROWS_AS(parse_model_json(R"({"terms": "saturated"})"), SpecificationError);
    CHECK_THROWS_AS(parse_model_json(R"({"variables": [{"name": "X", "levels": 2}], "terms": "bogus"})"),
                    SpecificationError);
    CHECK_THROWS_AS(parse_model_json(R"({"variables": [{"name": "X", "levels": 2}], "theta": [1, 2]})"),
                    SpecificationError);
    CHECK_THROWS_AS(parse_model_json(R"({"variables": [{"name": "X", "levels": 2}, {"name": "Y", "levels": 2}],
                                         "terms": [{"margin": ["X", "Y"], "effects": [["X"], ["Y"]]}]})"),
                    SpecificationError);
    CHECK_THROWS_AS(parse_model_json(R"({"variables": [{"name": "X", "levels": 2}, {"name": "Y", "levels": 2}],
                                         "terms": "saturated", "zero_constraints": [{"effect": ["Q"]}]})"),
                    SpecificationError);
}

TEST_CASE("estimates CSV round trips at full precision") {
    auto s = space_of({{"X", 3}, {"Y", 2}});
    auto f = parse_model_json(R"({"variables": [{"name": "X", "levels": 3}, {"name": "Y", "levels": 2}],
                                  "terms": "saturated", "zero_constraints": [{"effect": ["X", "Y"]}]})");
    auto fit = fit_mle(counts(s, {13, 27, 40, 11, 9, 33}), *f.model);
    auto rows = estimate_rows(fit, *f.model);
    REQUIRE(rows.size() == 5);
    std::stringstream io;
    write_estimates_csv(io, rows);
    auto back = read_estimates_csv(io);
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].estimate == rows[i].estimate);
        CHECK(back[i].se == rows[i].se);
        CHECK(back[i].effect == rows[i].effect);
        CHECK(back[i].levels == rows[i].levels);
        CHECK(back[i].constrained == rows[i].constrained);
    }
    CHECK(rows[3].constrained);
    CHECK(rows[3].effect == "X*Y");
    CHECK(rows[3].levels == "1;1");

    auto text = format_estimates_text(rows);
    CHECK(text.find("(fixed)") != std::string::npos);
    CHECK(text.find("-0.0000") == std::string::npos);
    auto summary = format_summary_text(fit);
    CHECK(summary.find("dof         2") != std::string::npos);
}

TEST_CASE("mediation report layout") {
    MediationResult m;
    m.transitions = {{0, 1}, {1, 2}};
    m.nde = {-0.0107, 0.01};
    m.nie = {0.0083, 0.002};
    m.te = {-0.0024, 0.012};
    m.se_nde = m.se_nie = m.se_te = {0.001, 0.002};
    std::ostringstream csv;
    write_mediation_csv(csv, m);
    CHECK(csv.str().rfind("from,to,effect,estimate,se\n0,1,direct,", 0) == 0);
    auto text = format_mediation_text(m);
    CHECK(text.find("0->1") != std::string::npos);
    CHECK(text.find("-0.0107") != std::string::npos);
    CHECK(text.find("Total") != std::string::npos);
}
