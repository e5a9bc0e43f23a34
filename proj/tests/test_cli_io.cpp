#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "confhyp/spec_io.hpp"

using namespace confhyp;
using S = Rational;

namespace {

std::string flat_spec_text(int d, int order) {
    ordered_json j;
    j["d"] = d;
    j["order"] = order;
    j["metric"] = "identity";
    return j.dump();
}

std::string cubic_spec_text() {
    return R"({
      "d": 4,
      "order": 6,
      "coordinates": ["s", "y", "x2", "x3"],
      "metric": [["1", "s*y^3", "0", "0"],
                 ["s*y^3", "1", "0", "0"],
                 ["0", "0", "1", "0"],
                 ["0", "0", "0", "1"]]
    })";
}

}  // namespace

TEST_CASE("expression parser agrees with directly built jets") {
    auto spec = parse_metric_spec(R"({
      "d": 3, "order": 4,
      "coordinates": ["s", "y", "x"],
      "metric": [["1 + 2*s*y^2 - 1/3*x^2", "0", "0"],
                 ["0", "1", "(s - y + 1)^2"],
                 ["0", "(s - y + 1)^2", "1"]],
      "base_point": ["0", "1", "0"]
    })");
    auto m = build_metric(spec);
    auto lay = m.layout_ptr();
    auto s = Jet<S>::coordinate(lay, 0);
    // coordinates are centered at the base point: y = 1 + (y - 1)
    auto y = Jet<S>::coordinate(lay, 1) + Jet<S>::constant(lay, S(1));
    auto x = Jet<S>::coordinate(lay, 2);
    Jet<S> e00 = Jet<S>::constant(lay, S(1)) + S(2) * (s * (y * y)) - S(1) / S(3) * (x * x);
    CHECK(m.g.at({0, 0}) == e00.truncated(m.order()));
    Jet<S> u = s - y + Jet<S>::constant(lay, S(1));
    Jet<S> e12 = u * u;
    CHECK(m.g.at({1, 2}) == e12.truncated(m.order()));
}

TEST_CASE("parse errors report line and column") {
    std::string bad = R"({
      "d": 3, "order": 4,
      "coordinates": ["s", "y", "x"],
      "metric": [["1", "s +* y", "0"],
                 ["s +* y", "1", "0"],
                 ["0", "0", "1"]]
    })";
    try {
        auto spec = parse_metric_spec(bad);
        build_metric(spec);
        FAIL("expected SpecError");
    } catch (const SpecError& e) {
        std::string msg = e.what();
        CHECK(msg.find("line") != std::string::npos);
        CHECK(msg.find("column") != std::string::npos);
    }
}

TEST_CASE("invalid specs are rejected") {
    // asymmetric metric table
    CHECK_THROWS_AS(parse_metric_spec(R"({
      "d": 3, "order": 3,
      "coordinates": ["s", "y", "x"],
      "metric": [["1", "s", "0"], ["y", "1", "0"], ["0", "0", "1"]]
    })"),
                    SpecError);
    // unknown coordinate in an entry
    auto spec = parse_metric_spec(R"({
      "d": 3, "order": 3,
      "coordinates": ["s", "y", "x"],
      "metric": [["1", "z", "0"], ["z", "1", "0"], ["0", "0", "1"]]
    })");
    CHECK_THROWS_AS(build_metric(spec), SpecError);
    // metric degenerate at the base point
    auto spec2 = parse_metric_spec(R"({
      "d": 3, "order": 3,
      "coordinates": ["s", "y", "x"],
      "metric": [["1", "0", "0"], ["0", "y", "0"], ["0", "0", "1"]]
    })");
    CHECK_THROWS(build_metric(spec2));
}

TEST_CASE("serialization round-trips") {
    auto spec = parse_metric_spec(cubic_spec_text());
    std::string once = serialize_spec(spec).dump();
    auto spec2 = parse_metric_spec(once);
    CHECK(serialize_spec(spec2).dump() == once);
}

TEST_CASE("defaults: order, mode, coordinate names, defining function") {
    auto spec = parse_metric_spec(R"({"d": 4, "metric": "identity"})");
    CHECK(spec.order == 6);  // d + 2
    CHECK(spec.mode == "rational");
    CHECK(spec.coordinates == std::vector<std::string>{"s", "y", "x2", "x3"});
    CHECK(spec.base_point == std::vector<Rational>(4, Rational(0)));
}

TEST_CASE("willmore command on the flat spec passes with zero invariant") {
    auto spec = parse_metric_spec(flat_spec_text(4, 6));
    auto rep = run_command("willmore", spec);
    CHECK(rep["pass"].get<bool>());
    CHECK(rep["outputs"]["B_at_base"].get<std::string>() == "0");
}

TEST_CASE("unknown command throws") {
    auto spec = parse_metric_spec(flat_spec_text(4, 6));
    CHECK_THROWS_AS(run_command("frobnicate", spec), SpecError);
}

TEST_CASE("conformal rescaling with Omega = 1 reproduces the invariant") {
    auto spec = parse_metric_spec(cubic_spec_text());
    auto rep = run_command("willmore", spec);
    MetricSpec rs = spec;
    rs.rescale = ordered_json("1");
    auto rep2 = run_command("willmore", conformal_rescale(rs));
    CHECK(rep2["outputs"]["B_at_base"] == rep["outputs"]["B_at_base"]);
    CHECK(rep["outputs"]["B_at_base"].get<std::string>() == "1/3");
}

TEST_CASE("constant rescaling scales the invariant by Omega^-d") {
    auto spec = parse_metric_spec(cubic_spec_text());
    MetricSpec rs = spec;
    rs.rescale = ordered_json("2");
    auto rep2 = run_command("willmore", conformal_rescale(rs));
    // 1/3 * 2^-4 = 1/48
    CHECK(rep2["outputs"]["B_at_base"].get<std::string>() == "1/48");
}

TEST_CASE("invariance command validates covariance of B, IIo, III") {
    auto spec = parse_metric_spec(R"({
      "d": 4, "order": 6,
      "coordinates": ["s", "y", "x2", "x3"],
      "metric": [["1", "s*y^3", "0", "0"],
                 ["s*y^3", "1", "0", "0"],
                 ["0", "0", "1", "0"],
                 ["0", "0", "0", "1"]],
      "rescale": "1 + y + 1/3*s"
    })");
    auto rep = run_command("invariance", spec);
    CHECK(rep["pass"].get<bool>());
    CHECK(rep["checks"]["B_covariant"].get<bool>());
    CHECK(rep["checks"]["IIo_covariant"].get<bool>());
    CHECK(rep["checks"]["III_covariant"].get<bool>());
}
