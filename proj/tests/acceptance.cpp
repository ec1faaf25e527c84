// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include <bcd/bcd.hpp>

using namespace bcd;
using checks::Check;

namespace {

struct Line
{
    bool pass = false;
    std::string text;
};

std::map<int, Line> results;

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void record(int id, bool pass, const std::string& title, const std::string& detail)
{
    results[id] = {pass, title + "  " + detail};
    std::cerr << "[" << id << "] " << (pass ? "pass" : "FAIL") << " " << title << "\n";
}

std::string describe(const Check& c)
{
    std::ostringstream os;
    os << c.name << " worst_margin=" << c.worst_margin << " samples=" << c.samples;
    if (!c.detail.empty()) os << " (" << c.detail << ")";
    return os.str();
}

// every monotonicity margin seen in any campaign or run
Check monotone_all{"monotone across all campaigns"};

void fold_monotone(const CampaignReport& rep, const std::string& label)
{
    for (const auto& o : rep.outcomes) {
        if (!o.result) {
            monotone_all.fail(label + "/" + o.rule.name() + ": " + o.error);
            continue;
        }
        const auto& tr = o.result->trace;
        for (std::size_t j = 0; j < tr.size(); ++j) {
            const double next = j + 1 < tr.size() ? tr[j + 1].F : o.result->final_F;
            const double slack = 1e-12 * (1.0 + std::abs(tr[j].F));
            monotone_all.margin((tr[j].F + slack - next) / (1.0 + std::abs(tr[j].F)), label + "/" + o.rule.name());
        }
    }
}

ExperimentConfig campaign_config(json problem, std::uint64_t iters, const std::string& dir, bool paper)
{
    json j = {{"seed", 0},
              {"paper_scale", paper},
              {"problem", std::move(problem)},
              {"run", {{"max_iters", iters}, {"diagnostics", true}}},
              {"output", {{"dir", dir}, {"timing", false}}}};
    return config_from_json(j);
}

} // namespace

int main(int argc, char** argv)
{
    const std::string out_root =
        argc > 1 ? argv[1] : (std::filesystem::temp_directory_path() / "bcd_acceptance").string();
    std::filesystem::remove_all(out_root);

    // 1. one-step inequality on the (200, 50, seed 0) smooth instance
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto p = to_problem(gen_instance(200, 50, 0));
        const auto r = checks::lemma4_runs(p, {"full", "uniform", "importance", "greedy", "cyclic", "nice:3", "greedymb:3"},
                                           500, 1, "m=200,n=50", generated_start(50, 0));
        const double secs = seconds_since(t0);
        const bool pass = r.one_step.pass && secs < 30.0;
        std::ostringstream d;
        d << describe(r.one_step) << " runtime=" << secs << "s (limit 30s)";
        record(1, pass, "one-step descent inequality, 7 rules x 500 iterations", d.str());
        monotone_all.margin(r.monotone.worst_margin, "criterion-1 runs");
    }

    // 3. proportion-function lower bounds by exact enumeration
    {
        checks::ThetaSuiteOptions o;
        o.m = 40;
        o.n = 12;
        o.instances = 3;
        o.points = 50;
        o.taus = {2, 3, 4};
        o.seed = 0;
        const auto suite = checks::theta_bounds(o);
        bool pass = true;
        std::ostringstream d;
        double worst = std::numeric_limits<double>::infinity();
        std::size_t samples = 0;
        for (const auto& c : suite) {
            pass = pass && c.pass;
            worst = std::min(worst, c.worst_margin);
            samples += c.samples;
            if (!c.pass) d << describe(c) << "; ";
        }
        d << suite.size() << " bounds, " << samples << " evaluations, worst relative margin=" << worst;
        record(3, pass, "theta lower bounds (n=12, tau<=4, 3 instances x 50 points)", d.str());
    }

    // 4. linear rate of full-batch descent on quadratics
    {
        const auto r = checks::polyak_rate(10, 0);
        record(4, r.contraction.pass && r.iterations.pass, "linear rate on quadratics with L*I smoothness",
               describe(r.contraction) + "; " + describe(r.iterations));
    }

    // 5 / 6. forcing-function bounds for strongly and weakly convex problems
    {
        const auto c = checks::theorem5(20, 100, 0);
        record(5, c.pass, "strongly convex forcing bound, 20 instances x 100 points", describe(c));
    }
    {
        const auto c = checks::theorem8(8, 100, 0);
        record(6, c.pass, "weakly convex forcing bound on level-set samples", describe(c));
    }

    // 7. weak PL membership of x1^2 x2^2
    {
        const auto c = checks::wpl_product_square(10000, 0);
        record(7, c.pass, "|grad f| |x| >= f for f = x1^2 x2^2 at 10^4 points", describe(c));
    }

    // 8. nonconvex disjunction on the plateau
    {
        const auto r = checks::plateau_disjunction(1e-6);
        std::ostringstream d;
        d << r.check.detail << " runtime=" << r.seconds << "s (limit 5s)";
        record(8, r.check.pass && r.seconds < 5.0, "plateau: xi <= eps or min lambda <= eps within predicted K", d.str());
    }

    // 9. m=1000, n=100 campaigns (also feed criterion 2)
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool pass = true;
        std::ostringstream d;
        for (const bool nonsmooth : {false, true}) {
            json prob = {{"type", "generated"}};
            if (nonsmooth) prob["lambda"] = "1/(2m)";
            const std::string label = nonsmooth ? "large-l1" : "large-smooth";
            const auto cfg = campaign_config(prob, 1000, out_root + "/" + label, true);
            const auto rep = run_campaign(cfg, true);
            fold_monotone(rep, label);
            std::size_t completed = 0;
            bool monotone = true;
            for (const auto& o : rep.outcomes) {
                if (o.result) ++completed;
                if (o.verification && !o.verification->get("monotone").pass) monotone = false;
            }
            const auto& cmp = rep.report.at("comparisons");
            const bool greedy_ok = cmp.value("greedy_ge_uniform", false);
            const bool ok = completed == rep.outcomes.size() && monotone && greedy_ok && rep.built.problem.dim() == 100;
            pass = pass && ok;
            double g = 0, u = 0;
            for (const auto& r : rep.report.at("runs")) {
                if (r.at("rule") == "greedy") g = r.at("cumulative_decrease").get<double>();
                if (r.at("rule") == "uniform") u = r.at("cumulative_decrease").get<double>();
            }
            d << label << ": " << completed << "/" << rep.outcomes.size() << " rules completed, monotone=" << monotone
              << ", decrease greedy=" << g << " uniform=" << u << "; ";
        }
        const double secs = seconds_since(t0);
        d << "runtime=" << secs << "s (limit 600s)";
        record(9, pass && secs < 600.0, "m=1000, n=100 smooth and l1 campaigns, 1000 iterations", d.str());
    }

    // 2. monotonicity over every campaign: desk-scale smooth, l1, plateau, quadratic and the runs above
    {
        const json problems[] = {
            {{"type", "generated"}},
            {{"type", "generated"}, {"lambda", "1/(2m)"}},
            {{"type", "builtin"}, {"name", "plateau"}},
            {{"type", "builtin"}, {"name", "quadratic"}},
            {{"type", "builtin"}, {"name", "quadratic_l1"}},
        };
        int i = 0;
        for (const auto& prob : problems) {
            const std::string label = "desk-" + std::to_string(i++);
            const auto rep = run_campaign(campaign_config(prob, 1000, out_root + "/" + label, false), true);
            fold_monotone(rep, label);
        }
        record(2, monotone_all.pass, "F never increases by more than 1e-12 (1 + |F|)", describe(monotone_all));
    }

    // 10. l1 certificate vs grid oracle
    {
        const auto c = checks::lambda_grid_oracle(10, 20, 0);
        record(10, c.pass, "l1 certificate vs per-coordinate grid oracle, n=10, 20 points", describe(c));
    }

    // 11. sequence bound
    {
        const auto c = checks::lemma3_sequences(100, 0);
        record(11, c.pass, "sequence bound on 100 random recursive sequences", describe(c));
    }

    int failed = 0;
    for (const auto& [id, line] : results) {
        std::cout << (line.pass ? "PASS" : "FAIL") << " criterion " << id << ": " << line.text << "\n";
        if (!line.pass) ++failed;
    }
    std::cout << results.size() - static_cast<std::size_t>(failed) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
