#include "chernlab/verify.hpp"

#include <cmath>
#include <sstream>

namespace chernlab {

namespace {

std::string fmt(double x) {
    std::ostringstream ss;
    ss.precision(12);
    ss << x;
    return ss.str();
}

MapState holo_disk_map(std::shared_ptr<const Domain> dom,
                       std::shared_ptr<const HermitianTarget> tgt, int variant) {
    switch (tgt->id()) {
        case TargetId::FlatC2:
            return MapState::sample(dom, tgt, [variant](int, cd x) {
                switch (variant % 3) {
                    case 0: return TargetPoint{x * x, 0.5 * x, 0};
                    case 1: return TargetPoint{x * x * x - 0.2 * x, x * x, 0};
                    default: return TargetPoint{std::exp(0.8 * x), 0.3 * x * x, 0};
                }
            });
        case TargetId::FSProduct:
            return MapState::sample(dom, tgt, [variant](int, cd x) {
                switch (variant % 3) {
                    case 0: return TargetPoint{0.8 * x, 0.5 * x * x - 0.1, 0};
                    case 1: return TargetPoint{x * x, 0.6 * x + 0.2, 0};
                    default: return TargetPoint{0.5 * std::exp(x), 0.4 * x, 0};
                }
            });
        case TargetId::Hopf:
            return MapState::sample(dom, tgt, [variant](int, cd x) {
                switch (variant % 3) {
                    case 0: return TargetPoint{1.3 * std::exp(0.4 * x), 0.3 * std::exp(-0.2 * x), 0};
                    case 1: return TargetPoint{1.25 + 0.3 * x * x, 0.4 * x, 0};
                    default: return TargetPoint{1.3 * std::exp(0.3 * x), 0.35 * x * x + 0.2, 0};
                }
            });
    }
    fail("ConfigError", "unreachable");
}

SuiteResult suite_torsion(const Config& cfg) {
    SuiteResult res;
    res.name = "torsion";
    res.csv.push_back("target,n,max_residual");
    const uint64_t seed = static_cast<uint64_t>(cfg.integer_or("seed", 7));
    const std::vector<int> ns = {48, 96};
    for (TargetId tid : {TargetId::FlatC2, TargetId::FSProduct, TargetId::Hopf}) {
        auto tgt = std::make_shared<HermitianTarget>(tid);
        std::vector<double> rs;
        for (int n : ns) {
            auto dom = std::make_shared<Domain>(Domain::torus(n, 1.0, DiffScheme::Stencil4));
            const MapState m = random_trig_map(dom, tgt, seed, 0.22);
            const double r = max_abs(torsion_identity_residual(m, 0));
            rs.push_back(r);
            res.csv.push_back(to_string(tid) + "," + std::to_string(n) + "," + fmt(r));
        }
        const double order = std::log2(rs[0] / std::max(rs[1], 1e-300));
        res.summary["order_" + to_string(tid)] = order;
        if (tid == TargetId::FlatC2) {
            if (rs[1] > 1e-8)
                res.failures.push_back("flat torsion residual " + fmt(rs[1]) + " > 1e-8");
        } else if (order < 3.0) {
            res.failures.push_back(to_string(tid) + " torsion order " + fmt(order) + " < 3.0");
        }
    }
    return res;
}

SuiteResult suite_bochner(const Config& cfg) {
    SuiteResult res;
    res.name = "bochner";
    res.csv.push_back("case,n,defect");
    (void)cfg;
    // flat polynomial identity, exact stencils
    {
        auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
        auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7));
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x * x * x, cd(0.0), 0};
        });
        const BochnerReport rep = bochner_check(m, 0, 1e-6);
        res.csv.push_back("flat_poly,96," + fmt(rep.defect));
        res.summary["flat_defect"] = rep.defect;
        if (rep.defect > 1e-8)
            res.failures.push_back("flat Bochner defect " + fmt(rep.defect) + " > 1e-8");
    }
    // holomorphic map into the Hopf surface across two resolutions
    {
        auto tgt = std::make_shared<HermitianTarget>(TargetId::Hopf);
        std::vector<double> defects;
        for (int n : {48, 96}) {
            auto dom = std::make_shared<Domain>(Domain::disk(n, 0.6));
            const MapState m = holo_disk_map(dom, tgt, 0);
            const BochnerReport rep = bochner_check(m, 0, 1e-4);
            defects.push_back(rep.defect);
            res.csv.push_back("hopf_holo," + std::to_string(n) + "," + fmt(rep.defect));
        }
        const double factor = defects[0] / std::max(defects[1], 1e-300);
        res.summary["hopf_factor"] = factor;
        if (factor < 2.0)
            res.failures.push_back("Hopf Bochner defect factor " + fmt(factor) + " < 2.0");
    }
    return res;
}

SuiteResult suite_conformal(const Config& cfg) {
    SuiteResult res;
    res.name = "conformal";
    res.csv.push_back("case,n,deviation");
    (void)cfg;
    auto tgt = std::make_shared<HermitianTarget>(TargetId::FSProduct);
    {
        auto dom = std::make_shared<Domain>(Domain::disk(64, 0.7));
        const MapState m = holo_disk_map(dom, tgt, 0);
        Grid2D<double> mu(64, 2.0);
        const double dev = conformal_change_check(m, 0, mu);
        res.csv.push_back("constant_mu,64," + fmt(dev));
        res.summary["constant_mu"] = dev;
        if (dev > 1e-8) res.failures.push_back("constant-mu deviation " + fmt(dev) + " > 1e-8");
    }
    {
        std::vector<double> devs;
        for (int n : {48, 96}) {
            auto dom = std::make_shared<Domain>(Domain::disk(n, 0.7));
            const MapState m = holo_disk_map(dom, tgt, 1);
            Grid2D<double> mu(n);
            const DomainChart& c = dom->chart(0);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) mu(i, j) = 1.0 + std::norm(c.point(i, j));
            devs.push_back(conformal_change_check(m, 0, mu));
            res.csv.push_back("variable_mu," + std::to_string(n) + "," + fmt(devs.back()));
        }
        const double factor = devs[0] / std::max(devs[1], 1e-300);
        res.summary["variable_mu_factor"] = factor;
        if (factor < 4.0)
            res.failures.push_back("variable-mu deviation factor " + fmt(factor) + " < 4.0");
    }
    return res;
}

SuiteResult suite_operators(const Config& cfg) {
    SuiteResult res;
    res.name = "operators";
    res.csv.push_back("target,order,n,defect");
    (void)cfg;
    for (TargetId tid : {TargetId::FlatC2, TargetId::Hopf}) {
        auto tgt = std::make_shared<HermitianTarget>(tid);
        std::vector<double> d2;
        for (int n : {48, 96}) {
            auto dom = std::make_shared<Domain>(Domain::disk(n, 0.6));
            const MapState m = holo_disk_map(dom, tgt, 0);
            const double o1 = first_order_operator_check(m, 0, 1e-4);
            const double o2 = second_order_operator_check(m, 0, 1e-4);
            d2.push_back(o2);
            res.csv.push_back(to_string(tid) + ",1," + std::to_string(n) + "," + fmt(o1));
            res.csv.push_back(to_string(tid) + ",2," + std::to_string(n) + "," + fmt(o2));
            if (tid == TargetId::FlatC2 && o1 > 1e-8)
                res.failures.push_back("flat first-order defect " + fmt(o1) + " > 1e-8");
            if (n == 96 && o1 > 1e-5)
                res.failures.push_back(to_string(tid) + " first-order defect " + fmt(o1));
        }
        const double factor = d2[0] / std::max(d2[1], 1e-300);
        res.summary["second_order_factor_" + to_string(tid)] = factor;
        if (tid == TargetId::Hopf && factor < 2.0)
            res.failures.push_back("second-order defect not decreasing (factor " +
                                   fmt(factor) + ")");
    }
    return res;
}

SuiteResult suite_isoperimetric(const Config& cfg) {
    SuiteResult res;
    res.name = "isoperimetric";
    res.csv.push_back("case,area,length,ratio,conformality_defect");
    (void)cfg;
    double worst_ratio = 0.0;
    bool flat_attained = false;
    int rows = 0;
    // flat inclusions at several radii
    {
        auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
        auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7));
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x, cd(0.0), 0};
        });
        for (double r : {0.15, 0.25, 0.35, 0.45, 0.55}) {
            const IsoperimetricRow row = isoperimetric_check(m, 0, cd(0.0), r);
            res.csv.push_back("flat_inclusion," + fmt(row.area) + "," + fmt(row.length) + "," +
                              fmt(row.ratio) + "," + fmt(row.conformality_defect));
            worst_ratio = std::max(worst_ratio, row.ratio);
            if (std::abs(row.ratio - 1.0 / (4.0 * PI)) < 0.01 / (4.0 * PI))
                flat_attained = true;
            ++rows;
        }
    }
    for (TargetId tid : {TargetId::FSProduct, TargetId::Hopf}) {
        auto tgt = std::make_shared<HermitianTarget>(tid);
        for (int variant = 0; variant < 3; ++variant) {
            auto dom = std::make_shared<Domain>(Domain::disk(96, 0.35));
            MapState m = holo_disk_map(dom, tgt, variant);
            for (double r : {0.08, 0.12, 0.18, 0.24, 0.30}) {
                const IsoperimetricRow row = isoperimetric_check(m, 0, cd(0.0), r);
                if (row.degenerate) continue;
                res.csv.push_back(to_string(tid) + "_holo" + std::to_string(variant) + "," +
                                  fmt(row.area) + "," + fmt(row.length) + "," + fmt(row.ratio) +
                                  "," + fmt(row.conformality_defect));
                worst_ratio = std::max(worst_ratio, row.ratio);
                ++rows;
            }
        }
    }
    res.summary["worst_ratio"] = worst_ratio;
    res.summary["rows"] = rows;
    if (rows < 20) res.failures.push_back("corpus too small: " + std::to_string(rows));
    if (!flat_attained) res.failures.push_back("flat 1/4pi ratio not attained within 1%");
    if (worst_ratio > 1.0) res.failures.push_back("isoperimetric ratio unbounded-looking");
    return res;
}

SuiteResult suite_monotonicity(const Config& cfg) {
    SuiteResult res;
    res.name = "monotonicity";
    res.csv.push_back("case,r,area_over_r2");
    (void)cfg;
    const std::vector<double> radii = {0.05, 0.08, 0.12, 0.18, 0.25};
    double inf_all = 1e300;
    {
        auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
        auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7));
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x, cd(0.0), 0};
        });
        const MonotonicityCurve mc =
            monotonicity_check(m, 0, TargetPoint{cd(0.0), cd(0.0), 0}, radii);
        for (size_t i = 0; i < mc.r.size(); ++i) {
            res.csv.push_back("flat_plane," + fmt(mc.r[i]) + "," + fmt(mc.area_over_r2[i]));
            if (std::abs(mc.area_over_r2[i] - PI) > 0.05 * PI)
                res.failures.push_back("flat plane A(r)/r^2 deviates from pi at r=" +
                                       fmt(mc.r[i]));
        }
        inf_all = std::min(inf_all, mc.infimum);
    }
    {
        auto tgt = std::make_shared<HermitianTarget>(TargetId::FSProduct);
        auto dom = std::make_shared<Domain>(Domain::disk(96, 0.5));
        const MapState m = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x, cd(0.0), 0};
        });
        const MonotonicityCurve mc =
            monotonicity_check(m, 0, TargetPoint{cd(0.0), cd(0.0), 0}, radii);
        for (size_t i = 0; i < mc.r.size(); ++i)
            res.csv.push_back("fs_disk," + fmt(mc.r[i]) + "," + fmt(mc.area_over_r2[i]));
        inf_all = std::min(inf_all, mc.infimum);
    }
    res.summary["infimum"] = inf_all;
    if (inf_all <= 0.0) res.failures.push_back("monotonicity infimum not positive");
    return res;
}

SuiteResult suite_regularity(const Config& cfg) {
    SuiteResult res;
    res.name = "regularity";
    res.csv.push_back("case,value");
    const double eps1 = cfg.num_or("bubble.epsilon1", 8.0);
    // epsilon-regularity on a concentrating member
    {
        std::vector<MapState> fam = concentrating_family(FamilyKind::FSProductBubble,
                                                         {8, 16, 32}, 128);
        std::vector<cd> centers = {cd(0.0), cd(0.3, 0.2), cd(-0.5, 0.4), cd(0.8, -0.3)};
        const auto rows = epsilon_regularity_check(fam[1], 0, centers, 0.12, eps1);
        const double c3 = empirical_c3(rows);
        res.csv.push_back("epsreg_c3," + fmt(c3));
        res.summary["c3"] = c3;
        if (!(c3 > 0.0) || c3 > 100.0)
            res.failures.push_back("empirical C3 out of range: " + fmt(c3));
    }
    // Morrey exponents: smooth map and branch point
    {
        auto tgt = std::make_shared<HermitianTarget>(TargetId::FlatC2);
        auto dom = std::make_shared<Domain>(Domain::disk(96, 0.7));
        const std::vector<double> radii = {0.08, 0.12, 0.18, 0.27, 0.40};
        const MapState smooth = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x + 0.3 * x * x, cd(0.0), 0};
        });
        const MorreyFit f1 = morrey_decay_fit(smooth, 0, cd(0.0), radii);
        res.csv.push_back("morrey_smooth_alpha," + fmt(f1.alpha));
        if (std::abs(f1.alpha - 2.0) > 0.3)
            res.failures.push_back("smooth Morrey exponent " + fmt(f1.alpha) + " != 2");
        const MapState branch = MapState::sample(dom, tgt, [](int, cd x) {
            return TargetPoint{x * x * x, cd(0.0), 0};
        });
        const MorreyFit f2 = morrey_decay_fit(branch, 0, cd(0.0), radii);
        res.csv.push_back("morrey_branch3_alpha," + fmt(f2.alpha));
        res.summary["branch_alpha"] = f2.alpha;
        if (std::abs(f2.alpha - 6.0) > 0.5)
            res.failures.push_back("x^3 branch Morrey exponent " + fmt(f2.alpha) + " != 6");
    }
    return res;
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"torsion", "bochner", "conformal", "operators", "isoperimetric",
            "monotonicity", "regularity"};
}

SuiteResult run_suite(const std::string& suite, const Config& cfg) {
    if (suite == "torsion") return suite_torsion(cfg);
    if (suite == "bochner") return suite_bochner(cfg);
    if (suite == "conformal") return suite_conformal(cfg);
    if (suite == "operators") return suite_operators(cfg);
    if (suite == "isoperimetric") return suite_isoperimetric(cfg);
    if (suite == "monotonicity") return suite_monotonicity(cfg);
    if (suite == "regularity") return suite_regularity(cfg);
    fail("UnknownSuite", "unknown suite '" + suite + "'");
}

}  // namespace chernlab
