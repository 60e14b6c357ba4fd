// pspace: compile, solve, verify, enumerate and render from the shell.
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pspace/gadgets.hpp"
#include "pspace/grid.hpp"
#include "pspace/ncl.hpp"
#include "pspace/rush.hpp"
#include "pspace/solve.hpp"
#include "pspace/subway.hpp"
#include "pspace/verify.hpp"

using namespace pspace;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// exit codes
constexpr int Ok = 0, DomainFailure = 1, UsageError = 2;

struct UsageFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageFailure("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

struct Config {
    size_t budget = 10'000'000;
    uint64_t seed = 2024;
    bool strict = false;
    std::string expect;
    std::string format = "ascii";
    std::string out;
    std::string trace_out, map_out;
};

void emit(const Config& cfg, const std::string& input, const std::string& text) {
    if (cfg.out.empty() || cfg.out == "-") {
        std::cout << text;
        return;
    }
    if (!input.empty() && fs::exists(cfg.out) && fs::equivalent(cfg.out, input))
        throw UsageFailure("output path is the input file");
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw UsageFailure("cannot write " + cfg.out);
    f << text;
}

void write_side(const std::string& path, const std::string& text) {
    if (path.empty()) return;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageFailure("cannot write " + path);
    f << text;
}

subway::Loaded load_subway(const std::string& path, bool strict) {
    subway::Loaded L = subway::from_json_text(slurp(path));
    auto problems = subway::validate_instance(L.instance, L.state, strict);
    if (!problems.empty()) throw std::runtime_error(path + ": " + problems.front());
    return L;
}

ncl::Instance load_ncl(const std::string& path) {
    ncl::Instance in = ncl::from_json_text(slurp(path));
    auto problems = ncl::validate(in);
    if (!problems.empty()) throw std::runtime_error(path + ": " + problems.front());
    return in;
}

int cmd_compile(const Config& cfg, const std::string& mode, const std::string& input) {
    if (mode == "ncl-to-ss" || mode == "ncl-to-rh") {
        gadget::Compiled c = gadget::compile_ncl_to_ss(load_ncl(input));
        write_side(cfg.trace_out, gadget::trace_to_json(c));
        if (mode == "ncl-to-ss") {
            emit(cfg, input, subway::to_json_text(c.instance, c.state));
            return Ok;
        }
        grid::Emitted e = grid::compile_ss_to_rh(c.instance, c.state);
        write_side(cfg.map_out, grid::map_to_json(e.map));
        emit(cfg, input, rush::serialize(e.state));
        return Ok;
    }
    if (mode == "ss-to-rh") {
        subway::Loaded L = load_subway(input, true);
        grid::Emitted e = grid::compile_ss_to_rh(L.instance, L.state);
        write_side(cfg.map_out, grid::map_to_json(e.map));
        emit(cfg, input, rush::serialize(e.state));
        return Ok;
    }
    throw UsageFailure("unknown compile mode " + mode);
}

int cmd_solve(const Config& cfg, const std::string& game, const std::string& input) {
    solve::SearchResult r;
    if (game == "rush")
        r = solve::solve_rush(rush::parse(slurp(input)), cfg.budget);
    else if (game == "subway") {
        subway::Loaded L = load_subway(input, cfg.strict);
        r = solve::solve_subway(L.instance, L.state, cfg.budget);
    } else if (game == "ncl")
        r = solve::solve_ncl(load_ncl(input), cfg.budget);
    else
        throw UsageFailure("unknown game " + game);
    json j = {{"solvable", r.solvable},
              {"budget_exceeded", r.budget_exceeded},
              {"explored", r.explored},
              {"frontier_peak", r.frontier_peak},
              {"wall_ms", r.wall_ms},
              {"length", r.solvable ? json(r.solution.size()) : json(nullptr)},
              {"solution", r.solution}};
    emit(cfg, input, j.dump(2) + "\n");
    if (r.budget_exceeded) return DomainFailure;
    if (cfg.expect == "solvable" && !r.solvable) return DomainFailure;
    if (cfg.expect == "unsolvable" && r.solvable) return DomainFailure;
    return Ok;
}

std::vector<std::pair<std::string, ncl::Instance>> ncl_suite(const std::vector<std::string>& files) {
    std::vector<std::string> paths = files;
    if (paths.empty()) {
        for (auto& f : fs::directory_iterator(std::string(PSPACE_FIXTURES) + "/ncl"))
            if (f.path().extension() == ".json" && f.path().stem() != "manifest") paths.push_back(f.path().string());
        std::sort(paths.begin(), paths.end());
    }
    std::vector<std::pair<std::string, ncl::Instance>> out;
    for (const auto& p : paths) {
        ncl::Instance in = ncl::from_json_text(slurp(p));
        if (!ncl::validate(in).empty()) continue;
        try {
            if (!ncl::verify_protected(in)) continue;  // outside the reduction's promise
        } catch (const ncl::BudgetExceeded&) {
        }
        out.push_back({fs::path(p).stem().string(), in});
    }
    return out;
}

int cmd_verify(const Config& cfg, const std::string& suite, const std::vector<std::string>& files) {
    using verify::GadgetKind;
    const GadgetKind kinds[] = {GadgetKind::EdgeBlue, GadgetKind::EdgeRed, GadgetKind::And, GadgetKind::ProtectedOr,
                                GadgetKind::Win};
    bool all = suite == "all", ok = true, known = false;
    std::ostringstream out;
    auto line = [&](bool good, const std::string& j) {
        ok = ok && good;
        out << j << "\n";
    };
    if (all || suite == "gadgets") {
        known = true;
        for (GadgetKind k : kinds) {
            auto r = verify::check_gadget_contract(k, cfg.budget);
            line(r.ok, verify::to_json(r));
        }
    }
    if (all || suite == "leakage") {
        known = true;
        for (GadgetKind k : kinds) {
            auto r = verify::check_leakage(k, cfg.budget);
            line(r.ok, verify::to_json(r));
        }
    }
    if (all || suite == "reversibility") {
        known = true;
        std::mt19937_64 rng(cfg.seed);
        std::vector<ncl::Instance> np;
        for (int i = 0; i < 20; ++i) np.push_back(verify::random_ncl(rng(), 6 + i % 10));
        std::vector<std::pair<subway::Instance, subway::State>> sp;
        for (auto& [n, in] : ncl_suite(files)) {
            auto c = gadget::compile_ncl_to_ss(in);
            sp.push_back({c.instance, c.state});
        }
        std::vector<rush::State> rp;
        for (int i = 0; i < 50; ++i) rp.push_back(verify::random_rush_board(rng(), 8));
        auto a = verify::check_reversibility(np, 1000, rng());
        line(a.ok, verify::to_json(a));
        if (!sp.empty()) {
            auto b = verify::check_reversibility(sp, 1000, rng());
            line(b.ok, verify::to_json(b));
        }
        auto c = verify::check_reversibility(rp, 1000, rng());
        line(c.ok, verify::to_json(c));
    }
    if (all || suite == "rectangle") {
        known = true;
        auto r = verify::check_bubble_rectangle(1000, 8, cfg.seed);
        line(r.ok, verify::to_json(r));
    }
    if (all || suite == "equivalence") {
        known = true;
        std::vector<std::pair<std::string, ncl::Instance>> small;
        for (auto& x : ncl_suite(files))
            if (x.second.edges.size() <= 6) small.push_back(x);
        auto r = verify::check_equivalence(small, cfg.budget);
        line(r.ok, verify::to_json(r));
    }
    if (all || suite == "bisimulation") {
        known = true;
        for (auto& [name, in] : ncl_suite(files)) {
            auto c = gadget::compile_ncl_to_ss(in);
            auto e = grid::compile_ss_to_rh(c.instance, c.state);
            auto b = grid::check_bisimulation(c.instance, c.state, e, cfg.budget);
            json j = {{"name", name},
                      {"ok", b.ok},
                      {"subway_states", b.ss_states},
                      {"rush_states", b.rush_states},
                      {"rest_states", b.rest_states},
                      {"max_corridor_moves", b.max_corridor_moves},
                      {"solvable", b.ss_solvable && b.rush_solvable},
                      {"message", b.message}};
            line(b.ok, j.dump());
        }
    }
    if (all || suite == "hardest") {
        known = true;
        for (int n = 2; n <= 3; ++n) {
            auto h = solve::enumerate_hardest(n);
            int naive = solve::hardest_naive(n);
            json j = {{"n", n}, {"moves", h.moves}, {"naive", naive}, {"ok", h.moves == naive}};
            line(h.moves == naive, j.dump());
        }
    }
    if (!known) throw UsageFailure("unknown suite " + suite);
    emit(cfg, "", out.str());
    return ok ? Ok : DomainFailure;
}

int cmd_enumerate(const Config& cfg, int n, bool long_run, bool fixed) {
    solve::EnumConstraints c;
    c.long_run = long_run;
    c.fixed_blocks = fixed;
    solve::HardestResult h;
    try {
        h = solve::enumerate_hardest(n, c);
    } catch (const solve::BudgetExceeded& e) {
        std::cerr << "pspace: " << e.what() << "\n";
        return DomainFailure;
    }
    json j = {{"n", h.n},
              {"moves", h.moves},
              {"solvable_instances", h.solvable_instances},
              {"canonical_instances", h.canonical_instances},
              {"witness", h.moves >= 0 ? json(rush::serialize(h.witness)) : json(nullptr)}};
    emit(cfg, "", j.dump(2) + "\n");
    return Ok;
}

int cmd_render(const Config& cfg, const std::string& input) {
    rush::State s = rush::parse(slurp(input));
    if (cfg.format == "ascii")
        emit(cfg, input, rush::serialize(s));
    else if (cfg.format == "svg")
        emit(cfg, input, grid::render_svg(s));
    else
        throw UsageFailure("unknown format " + cfg.format);
    return Ok;
}

std::string rstrip_lines(const std::string& s) {
    std::istringstream in(s);
    std::string line, out;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t' || line.back() == '\r')) line.pop_back();
        out += line + "\n";
    }
    while (out.size() >= 2 && out[out.size() - 1] == '\n' && out[out.size() - 2] == '\n') out.pop_back();
    return out;
}

// serialize(parse(file)) against the file, modulo trailing whitespace; JSON
// compared as values so key order does not matter
int cmd_roundtrip(const std::string& input) {
    std::string text = slurp(input);
    bool same;
    if (text.rfind("%RH", 0) == 0) {
        same = rstrip_lines(rush::serialize(rush::parse(text))) == rstrip_lines(text);
    } else {
        json j = json::parse(text);
        std::string again;
        if (j.contains("special")) {  // subway; NCL files have no special token
            subway::Loaded L = subway::from_json_text(text);
            again = subway::to_json_text(L.instance, L.state);
        } else {
            ncl::Instance in = ncl::from_json_text(text);
            again = ncl::to_json_text(in, ncl::initial_state(in));
        }
        same = json::parse(again) == j;
    }
    std::cout << json({{"file", input}, {"roundtrip", same}}).dump() << "\n";
    return same ? Ok : DomainFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pspace: Rush Hour, Subway Shuffle and constraint-logic tools"};
    app.require_subcommand(1);
    Config cfg;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--budget-states", cfg.budget, "state budget for searches")->check(CLI::PositiveNumber);
        sub->add_option("--seed", cfg.seed, "seed for every random choice");
        sub->add_flag("--strict", cfg.strict, "strict instance validation");
        sub->add_option("-o,--output", cfg.out, "output file (default stdout)");
    };

    std::string mode, game, suite, input;
    std::vector<std::string> files;
    int n = 0;
    bool long_run = false, fixed = false;

    auto* compile = app.add_subcommand("compile", "ncl-to-ss | ss-to-rh | ncl-to-rh");
    compile->add_option("mode", mode)->required()->check(CLI::IsMember({"ncl-to-ss", "ss-to-rh", "ncl-to-rh"}));
    compile->add_option("input", input)->required()->check(CLI::ExistingFile);
    compile->add_option("--trace", cfg.trace_out, "write the gadget trace map (JSON)");
    compile->add_option("--map", cfg.map_out, "write the board abstraction map (JSON)");
    common(compile);

    auto* solve_cmd = app.add_subcommand("solve", "breadth-first solve: rush | subway | ncl");
    solve_cmd->add_option("game", game)->required()->check(CLI::IsMember({"rush", "subway", "ncl"}));
    solve_cmd->add_option("input", input)->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--expect", cfg.expect)->check(CLI::IsMember({"solvable", "unsolvable"}));
    common(solve_cmd);

    auto* verify_cmd = app.add_subcommand("verify", "machine checks; nonzero exit on any failure");
    verify_cmd
        ->add_option("suite", suite,
                     "gadgets | leakage | reversibility | rectangle | equivalence | bisimulation | hardest | all")
        ->required();
    verify_cmd->add_option("inputs", files, "NCL instances (default: the shipped fixtures)")->check(CLI::ExistingFile);
    common(verify_cmd);

    auto* enumerate = app.add_subcommand("enumerate", "hardest single-bubble n x n board");
    enumerate->add_option("--n", n)->required()->check(CLI::Range(1, 8));
    enumerate->add_flag("--long-run", long_run, "allow n >= 5");
    enumerate->add_flag("--fixed-blocks", fixed, "include fixed cells (n <= 3)");
    common(enumerate);

    auto* render = app.add_subcommand("render", "draw a %RH1 board");
    render->add_option("input", input)->required()->check(CLI::ExistingFile);
    render->add_option("--format", cfg.format)->check(CLI::IsMember({"ascii", "svg"}));
    common(render);

    auto* roundtrip = app.add_subcommand("roundtrip", "parse and re-serialize; exit 1 on a difference");
    roundtrip->add_option("input", input)->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return UsageError;
    }

    try {
        if (*compile) return cmd_compile(cfg, mode, input);
        if (*solve_cmd) return cmd_solve(cfg, game, input);
        if (*verify_cmd) return cmd_verify(cfg, suite, files);
        if (*enumerate) return cmd_enumerate(cfg, n, long_run, fixed);
        if (*render) return cmd_render(cfg, input);
        if (*roundtrip) return cmd_roundtrip(input);
    } catch (const UsageFailure& e) {
        std::cerr << "pspace: " << e.what() << "\n";
        return UsageError;
    } catch (const rush::ParseError& e) {
        std::cerr << "pspace: " << input << ": " << e.what() << "\n";
        return UsageError;
    } catch (const json::exception& e) {
        std::cerr << "pspace: " << input << ": " << e.what() << "\n";
        return UsageError;
    } catch (const gadget::CompileError& e) {
        std::cerr << "pspace: compile failed: " << e.what() << "\n";
        return DomainFailure;
    } catch (const grid::LayoutError& e) {
        std::cerr << "pspace: layout failed: " << e.what() << "\n";
        return DomainFailure;
    } catch (const std::exception& e) {
        // malformed instance content (bad ids, invalid vertices, ...)
        std::cerr << "pspace: " << e.what() << "\n";
        return UsageError;
    }
    return UsageError;
}
