#include "chernlab/config.hpp"
#include "chernlab/snapshot.hpp"
#include "chernlab/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chernlab;

namespace {

std::string now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
    return buf;
}

void write_text(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    if (!f) fail("IOError", "cannot write " + p.string());
    f << text;
}

json tree_json(const BubbleTreeNode& n) {
    json j;
    j["index"] = n.index;
    j["energy"] = n.energy;
    j["mass_in"] = n.mass_in;
    j["attach"] = {{"chart", n.attach_chart},
                   {"re", n.attach_point.real()},
                   {"im", n.attach_point.imag()}};
    if (n.has_south)
        j["south_value"] = {{"z1_re", n.south_value.z1.real()},
                            {"z1_im", n.south_value.z1.imag()},
                            {"z2_re", n.south_value.z2.real()},
                            {"z2_im", n.south_value.z2.imag()},
                            {"chart", n.south_value.chart}};
    j["depth_cap_hit"] = n.depth_cap_hit;
    j["renorms"] = json::array();
    for (const auto& r : n.renorms) {
        j["renorms"].push_back({{"k", r.k_family},
                                {"rank", r.rank},
                                {"x_tilde_re", r.x_tilde.real()},
                                {"x_tilde_im", r.x_tilde.imag()},
                                {"mu", r.mu},
                                {"window", r.r_window},
                                {"neck_outer", r.neck_outer},
                                {"T", r.T},
                                {"d7", {{"lhs", r.d7_lhs}, {"rhs", r.d7_rhs}, {"ok", r.d7_ok}}},
                                {"d9", {{"lhs", r.d9_lhs}, {"rhs", r.d9_rhs}, {"ok", r.d9_ok}}}});
    }
    j["necks"] = json::array();
    for (const auto& nk : n.necks) {
        json loops = json::array();
        for (size_t i = 0; i < nk.loop_t.size(); ++i)
            loops.push_back({{"t", nk.loop_t[i]}, {"len", nk.loop_len[i]}});
        j["necks"].push_back({{"energy", nk.energy},
                              {"diameter", nk.diameter},
                              {"end_loop_max", nk.end_loop_max},
                              {"loops", loops}});
    }
    j["children"] = json::array();
    for (const auto& ch : n.children) j["children"].push_back(tree_json(ch));
    return j;
}

void save_tree_snapshots(const BubbleTreeNode& n, const fs::path& dir) {
    if (!n.map.charts.empty()) save_snapshot(n.map, (dir / ("node_" + n.index + ".snap")).string());
    for (const auto& ch : n.children) save_tree_snapshots(ch, dir);
}

int cmd_solve(const Config& cfg) {
    Experiment ex = build_experiment(cfg);
    SolveReport rep;
    try {
        rep = flow_to_harmonic(ex.initial, ex.flow);
    } catch (const Error& e) {
        if (e.code() == "Diverged" || e.code() == "StepTooLarge") {
            std::cerr << e.what() << "\n";
            return 2;
        }
        throw;
    }
    fs::create_directories(ex.out_dir);
    save_snapshot(ex.initial, (fs::path(ex.out_dir) / "map.snap").string());
    json out;
    out["command"] = "solve";
    out["converged"] = rep.converged;
    out["steps"] = rep.steps_taken;
    out["dt"] = rep.dt_used;
    out["final_residual"] = rep.residual_history.empty() ? 0.0 : rep.residual_history.back();
    out["final_energy"] = rep.energy_history.empty() ? 0.0 : rep.energy_history.back();
    out["residual_history"] = rep.residual_history;
    out["energy_history"] = rep.energy_history;
    out["timestamp"] = now_iso();
    write_text(fs::path(ex.out_dir) / "results.json", out.dump(2) + "\n");
    std::cout << (rep.converged ? "converged" : "not converged") << " in " << rep.steps_taken
              << " steps, residual " << out["final_residual"] << "\n";
    return 0;
}

int cmd_verify(const Config& cfg, const std::string& suite, const std::string& out_dir) {
    const SuiteResult res = run_suite(suite, cfg);
    fs::create_directories(fs::path(out_dir) / "tables");
    std::string csv;
    for (const auto& line : res.csv) csv += line + "\n";
    write_text(fs::path(out_dir) / "tables" / (res.name + ".csv"), csv);
    json out;
    out["command"] = "verify";
    out["suite"] = res.name;
    out["summary"] = res.summary;
    out["failures"] = res.failures;
    out["timestamp"] = now_iso();
    write_text(fs::path(out_dir) / "results.json", out.dump(2) + "\n");
    for (const auto& f : res.failures) std::cerr << "FAIL: " << f << "\n";
    std::cout << "suite " << res.name << ": " << (res.failures.empty() ? "pass" : "FAIL")
              << " (" << res.csv.size() - 1 << " rows)\n";
    return res.failures.empty() ? 0 : 3;
}

int cmd_bubble(const Config& cfg) {
    Experiment ex = build_experiment(cfg);
    const std::string fam_s = cfg.str_or("bubble.family", "fs_bubble");
    const int n = static_cast<int>(cfg.num_or("domain.n", 256));
    const std::vector<MapState> fam =
        concentrating_family(family_from_string(fam_s), ex.bubble.k_values, n);
    const BubbleTreeNode tree = build_tree(fam, ex.bubble);
    const EnergyIdentityReport ei = energy_identity_check(tree, fam);
    const double mismatch = distance_bubbling_check(tree);

    fs::create_directories(ex.out_dir);
    json out = tree_json(tree);
    out["energy_identity"] = {{"family_limit", ei.family_limit},
                              {"base", ei.base_energy},
                              {"bubbles", ei.bubble_sum},
                              {"abs_err", ei.abs_err},
                              {"rel_err", ei.rel_err}};
    out["distance_bubbling"] = mismatch;
    json acc = json::array();
    for (const auto& row : mass_accounting(tree))
        acc.push_back({{"index", row.index},
                       {"mass_in", row.mass_in},
                       {"node_energy", row.node_energy},
                       {"children_mass", row.children_mass},
                       {"rel_err", row.rel_err}});
    out["mass_accounting"] = acc;
    write_text(fs::path(ex.out_dir) / "tree.json", out.dump(2) + "\n");
    save_tree_snapshots(tree, fs::path(ex.out_dir));

    json res;
    res["command"] = "bubble";
    res["energy_identity_rel_err"] = ei.rel_err;
    res["distance_bubbling"] = mismatch;
    res["nodes"] = tree.count_nodes();
    res["depth"] = tree.depth();
    res["timestamp"] = now_iso();
    write_text(fs::path(ex.out_dir) / "results.json", res.dump(2) + "\n");

    const double tol = cfg.num_or("bubble.identity_tol", 0.02);
    std::cout << "tree: " << tree.count_nodes() << " nodes, depth " << tree.depth()
              << ", energy identity rel err " << ei.rel_err << "\n";
    if (ei.rel_err > tol) {
        std::cerr << "FAIL: energy identity rel err " << ei.rel_err << " > " << tol << "\n";
        return 3;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"chernlab: a numerical laboratory for Chern-harmonic maps"};
    app.require_subcommand(1);

    std::string config_path, out_override, suite;
    uint64_t seed_override = 0;
    bool seed_set = false;
    int res_override = 0;

    app.add_option("--config", config_path, "configuration file (dotted keys)");
    app.add_option("--out", out_override, "output directory override");
    app.add_option_function<uint64_t>(
           "--seed", [&](uint64_t s) { seed_override = s; seed_set = true; },
           "rng seed override");
    app.add_option("--resolution-override", res_override, "grid resolution override");

    auto* solve = app.add_subcommand("solve", "run the flow solver");
    auto* verify = app.add_subcommand("verify", "run a verification suite");
    verify->add_option("suite", suite, "one of: torsion bochner conformal operators "
                                       "isoperimetric monotonicity regularity")
        ->required();
    auto* bubble = app.add_subcommand("bubble", "run the bubble-tree pipeline");
    std::string snap_path;
    auto* info = app.add_subcommand("snapshot-info", "print a snapshot header");
    info->add_option("path", snap_path, "snapshot file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (info->parsed()) {
            std::cout << snapshot_info(snap_path) << "\n";
            return 0;
        }
        Config cfg = config_path.empty() ? Config::parse_string("")
                                         : Config::parse_file(config_path);
        if (!out_override.empty()) cfg.set("output.dir", out_override);
        if (seed_set) cfg.set("seed", std::to_string(seed_override));
        if (res_override > 0) cfg.set("domain.n", std::to_string(res_override));

        if (solve->parsed()) return cmd_solve(cfg);
        if (verify->parsed()) {
            const std::string out_dir = cfg.str_or("output.dir", "out");
            return cmd_verify(cfg, suite, out_dir);
        }
        if (bubble->parsed()) return cmd_bubble(cfg);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        if (e.code() == "ConfigError" || e.code() == "UnknownSuite" || e.code() == "IOError")
            return 1;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
