#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pspace/gadgets.hpp"
#include "pspace/solve.hpp"

using namespace pspace;

namespace {
std::string slurp(const std::string& p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}
std::string fx(const std::string& name) { return std::string(PSPACE_FIXTURES) + "/ncl/" + name + ".json"; }
nlohmann::json manifest() { return nlohmann::json::parse(slurp(std::string(PSPACE_FIXTURES) + "/ncl/manifest.json")); }
}  // namespace

TEST(Gadgets, DualTreeSpansFaces) {
    const auto man = manifest();
    for (auto& [name, _] : man.items()) {
        ncl::Instance in = ncl::from_json_text(slurp(fx(name)));
        auto t = gadget::build_dual_tree(in);
        EXPECT_EQ(t.tree_edges.size() + 1, t.faces.size()) << name;
        for (int d : t.depth) EXPECT_GE(d, 0) << name;
    }
}

TEST(Gadgets, CompiledFixturesAreStrictlyValid) {
    const auto man = manifest();
    for (auto& [name, _] : man.items()) {
        ncl::Instance in = ncl::from_json_text(slurp(fx(name)));
        gadget::Compiled c = gadget::compile_ncl_to_ss(in);
        EXPECT_TRUE(subway::validate_instance(c.instance, c.state, true).empty()) << name;
        EXPECT_EQ(subway::count_empty(c.state), 2) << name;  // bubble + target
        EXPECT_TRUE(gadget::at_rest(c, c.state)) << name;
        auto p = gadget::project_ncl(c, c.state);
        ASSERT_TRUE(p.has_value()) << name;
        EXPECT_EQ(*p, ncl::initial_state(in)) << name;
    }
}

TEST(Gadgets, UnprotectedOrRejected) {
    ncl::Instance in = ncl::from_json_text(slurp(fx("or_unprotected")));
    EXPECT_THROW(gadget::compile_ncl_to_ss(in), gadget::CompileError);
}

// solvability of the compiled Subway Shuffle instance against the brute-force
// NCL oracle recorded with the fixtures
TEST(Gadgets, SubwaySolvabilityMatchesOracle) {
    const auto man = manifest();
    for (auto& [name, m] : man.items()) {
        ncl::Instance in = ncl::from_json_text(slurp(fx(name)));
        gadget::Compiled c = gadget::compile_ncl_to_ss(in);
        auto r = solve::solve_subway(c.instance, c.state, 10'000'000);
        EXPECT_EQ(r.solvable, m["solvable"].get<bool>()) << name << " explored " << r.explored;
        EXPECT_EQ(solve::solve_ncl(in, 1'000'000).solvable, m["solvable"].get<bool>()) << name;
    }
}
