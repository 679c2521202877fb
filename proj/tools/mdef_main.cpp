// Command line front end: loads JSON configs, dispatches to the library,
// and writes CSV or JSON reports with a fixed header so that identical
// (config, seed) pairs always produce identical bytes.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdef/conditional.hpp"
#include "mdef/config_io.hpp"
#include "mdef/fixtures.hpp"
#include "mdef/martingale.hpp"
#include "mdef/oracle.hpp"
#include "mdef/prediction.hpp"

using namespace mdef;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCheckFailed = 2;

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::stod(cur));
    return out;
}

void emit(const std::filesystem::path& out, const std::string& text) {
    if (out.empty()) {
        std::fputs(text.c_str(), stdout);
        return;
    }
    std::ofstream f(out, std::ios::binary);
    require(f.good(), "cannot write " + out.string());
    f << text;
}

int cmd_validate(const std::string& model_path, double tol,
                 const std::string& out) {
    const LoadedModel lm = load_model(model_path);
    const ValidationReport& rep = lm.model.ensure_validated(tol);
    ReportMeta meta{lm.config_hash, 0, rep.tol};
    std::vector<std::vector<std::string>> rows;
    auto push = [&rows](const std::string& section, const DefectEntry& e) {
        rows.push_back({section, std::to_string(e.t), std::to_string(e.node),
                        std::to_string(e.k), format_double(e.defect)});
    };
    for (const auto& e : rep.normalization) push("normalization", e);
    for (const auto& e : rep.martingale) push("martingale", e);
    for (const auto& e : rep.beta_condition) push("beta-condition", e);
    rows.push_back({"summary", "-1", "-1", "-1",
                    format_double(std::max(
                        {rep.max_normalization_defect,
                         rep.max_martingale_defect, rep.max_beta_defect}))});
    write_csv(resolve_out_path(out.empty() ? "validate.csv" : out), meta,
              {"section", "t", "node", "k", "defect"}, rows);
    return rep.pass ? kExitOk : kExitCheckFailed;
}

json measure_to_json(const DensityModel& model, const PredictionMeasure& pm) {
    json j;
    j["t"] = pm.t;
    j["regime"] = pm.regime;
    j["mass_zero"] = pm.mass_zero;
    if (pm.on_grid) {
        j["weights"] = pm.weights;
    } else {
        json pins = json::array();
        for (const auto& [coord, v] : pm.pins)
            pins.push_back({{"coord", coord}, {"time", v}});
        j["pins"] = pins;
        j["cut"] = pm.cut;
        j["normalizer"] = pm.normalizer;
        const ParametricFamily& fam = *model.family();
        const double hi = model.reference().u_max();
        json samples = json::array();
        const bool all_pinned =
            static_cast<int>(pm.pins.size()) == model.n();
        for (int s = all_pinned ? 9 : 1; s <= 8; ++s) {
            const double u = pm.cut + s * (hi - pm.cut) / 8.0;
            std::vector<double> pt(model.n());
            for (auto& x : pt) x = u;
            for (const auto& [coord, v] : pm.pins) pt[coord] = v;
            samples.push_back(
                {{"u", u}, {"density", fam.density(pt) / pm.normalizer}});
        }
        j["density_samples"] = samples;
    }
    return j;
}

int cmd_predict(const std::string& model_path, const std::string& scheme_name,
                double t0, double eps, double t, const std::string& realized,
                const std::string& out) {
    const LoadedModel lm = load_model(model_path);
    const DensityModel& model = lm.model;
    ObservationScheme scheme = lm.scheme;
    if (!scheme_name.empty())
        scheme = ObservationScheme::parse(scheme_name, t0, eps);
    const std::vector<double> pt = parse_list(realized);

    PredictionMeasure pm;
    if (model.is_grid()) {
        const std::size_t want =
            model.marks() ? 2 * model.n() : model.n();
        require(pt.size() == want, "realized point has wrong dimension");
        std::size_t k = model.reference().size();
        for (std::size_t j = 0; j < model.reference().size(); ++j) {
            const auto& q = model.reference().point(j);
            bool same = true;
            for (std::size_t c = 0; c < want && same; ++c)
                same = std::abs(q[c] - pt[c]) <= grid_tol;
            if (same) k = j;
        }
        require(k < model.reference().size(),
                "realized point is not on the grid");
        pm = predict_generic(model, scheme, t, k);
    } else if (model.n() == 1) {
        pm = predict_single_default(
            model, t, pt.at(0),
            scheme.kind == SchemeKind::insider
                ? std::optional<double>(scheme.t0)
                : std::nullopt);
    } else if (model.ordered()) {
        pm = predict_ordered(model, t, pt);
    } else {
        pm = predict_nonordered(model, t, pt);
    }

    json j = measure_to_json(model, pm);
    j["config_hash"] = lm.config_hash;
    j["version"] = library_version;
    emit(out.empty() ? std::filesystem::path{} : resolve_out_path(out),
         j.dump(2) + "\n");
    return kExitOk;
}

int cmd_condexp(const std::string& model_path, const std::string& scheme_name,
                double t0, double eps, const std::string& payoff_path,
                double t, const std::string& method,
                const std::string& realized, const std::string& out,
                bool discounted) {
    const LoadedModel lm = load_model(model_path);
    const DensityModel& model = lm.model;
    ObservationScheme scheme = lm.scheme;
    if (!scheme_name.empty())
        scheme = ObservationScheme::parse(scheme_name, t0, eps);
    const Payoff payoff = load_payoff(payoff_path);
    const double factor = discounted ? payoff.discount(t) : 1.0;
    ReportMeta meta{lm.config_hash, 0, grid_tol};
    std::vector<std::vector<std::string>> rows;

    if (model.is_grid()) {
        const CondexpTable table =
            condexp_G(model, scheme, payoff, static_cast<int>(t),
                      method == "bayes" ? CondexpMethod::bayes
                                        : CondexpMethod::direct);
        for (std::size_t i = 0; i < table.nodes.size(); ++i)
            for (std::size_t a = 0; a < table.partition.atoms.size(); ++a)
                rows.push_back(
                    {std::to_string(table.nodes[i]),
                     table.partition.labels[a],
                     format_double(factor * table.value[i][a]),
                     table.undefined[i][a] ? "mass-zero" : "ok"});
    } else {
        // closed form: the alive regime, plus the realized one if given
        std::vector<PredictionMeasure> pms;
        const int n = model.n();
        if (n == 1) {
            pms.push_back(predict_single_default(
                model, t, model.reference().u_max() + 1.0,
                scheme.kind == SchemeKind::insider
                    ? std::optional<double>(scheme.t0)
                    : std::nullopt));
        } else {
            std::vector<double> alive(n, model.reference().u_max() + 1.0);
            pms.push_back(model.ordered()
                              ? predict_ordered(model, t, alive)
                              : predict_nonordered(model, t, alive));
        }
        if (!realized.empty()) {
            const std::vector<double> pt = parse_list(realized);
            if (n == 1)
                pms.push_back(predict_single_default(
                    model, t, pt.at(0),
                    scheme.kind == SchemeKind::insider
                        ? std::optional<double>(scheme.t0)
                        : std::nullopt));
            else
                pms.push_back(model.ordered()
                                  ? predict_ordered(model, t, pt)
                                  : predict_nonordered(model, t, pt));
        }
        for (const auto& pm : pms)
            rows.push_back({"0", pm.regime,
                            format_double(factor *
                                          condexp_G_lebesgue(model, payoff, pm)),
                            pm.mass_zero ? "mass-zero" : "ok"});
    }
    write_csv(resolve_out_path(out.empty() ? "condexp.csv" : out), meta,
              {"node", "atom", "value", "flags"}, rows);
    return kExitOk;
}

void report_rows(const CheckReport& rep, const std::string& name,
                 std::vector<std::vector<std::string>>& rows) {
    for (const auto& r : rep.rows)
        rows.push_back({name, format_double(r.t), std::to_string(r.node),
                        r.state, format_double(r.defect)});
    rows.push_back({name + "/summary", "-1", "-1",
                    rep.pass ? "pass" : "fail",
                    format_double(rep.max_defect)});
}

int cmd_check(const std::string& model_path, const std::string& criterion,
              const std::string& candidate_path, const std::string& times_arg,
              double tol, std::uint64_t seed, const std::string& out) {
    const LoadedModel lm = load_model(model_path);
    const DensityModel& model = lm.model;
    std::vector<double> times = times_arg.empty()
                                    ? std::vector<double>{}
                                    : parse_list(times_arg);
    if (times.empty())
        for (int t = 0; t <= model.t_max(); ++t) times.push_back(t);

    ReportMeta meta{lm.config_hash, seed, tol};
    std::vector<std::vector<std::string>> rows;
    bool pass = false;

    if (criterion == "immersion") {
        const ImmersionReport rep =
            check_immersion(model, scheme_for_model(model), times, tol);
        report_rows(rep.equality, "equality", rows);
        report_rows(rep.reference_martingales, "reference-martingales", rows);
        pass = rep.immersed;
    } else if (criterion == "initial") {
        const ParametrizedEvaluator w =
            load_initial_weights(candidate_path, model);
        const InitialReport rep =
            check_initial_enlargement_martingale(w, model, times, tol);
        report_rows(rep.parametrized, "density-weighted", rows);
        report_rows(rep.direct, "direct", rows);
        pass = rep.pass() && rep.agree;
    } else {
        const GMartingaleCandidate cand =
            load_candidate(candidate_path, model);
        if (criterion == "mtilde") {
            const MtildeReport rep = check_mtilde_condition(
                cand, model, scheme_for_model(model), times, tol);
            report_rows(rep.condition, "condition", rows);
            report_rows(rep.direct, "direct", rows);
            pass = rep.pass();
        } else if (criterion == "ordered" || criterion == "nonordered") {
            const CharacterizationReport rep =
                criterion == "ordered"
                    ? check_ordered_characterization(cand, model, times, tol)
                    : check_nonordered_characterization(cand, model, times,
                                                        tol);
            report_rows(rep.a, "grouped-identity", rows);
            report_rows(rep.b, "compensated-form", rows);
            rows.push_back({"equivalence", "-1", "-1",
                            rep.equivalent ? "pass" : "fail", "0"});
            pass = rep.pass() && rep.equivalent;
        } else {
            throw std::invalid_argument("unknown criterion: " + criterion);
        }
    }
    write_csv(resolve_out_path(out.empty() ? "check.csv" : out), meta,
              {"report", "t", "node", "state", "defect"}, rows);
    return pass ? kExitOk : kExitCheckFailed;
}

int cmd_simulate(const std::string& model_path, std::uint64_t seed,
                 long long count, const std::string& out) {
    const LoadedModel lm = load_model(model_path);
    const std::vector<SystemSample> samples = sample_system(
        lm.model, lm.scheme, seed, static_cast<std::size_t>(count));
    ReportMeta meta{lm.config_hash, seed, 0.0};
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const SystemSample& s = samples[i];
        std::string coords;
        for (std::size_t c = 0; c < s.x.size(); ++c)
            coords += (c ? ";" : "") + format_double(s.x[c]);
        std::string hist;
        for (std::size_t h = 0; h < s.observations.size(); ++h)
            hist += (h ? ";" : "") + s.observations[h];
        rows.push_back({std::to_string(i), std::to_string(s.leaf),
                        std::to_string(s.k), coords, hist});
    }
    write_csv(resolve_out_path(out.empty() ? "samples.csv" : out), meta,
              {"draw", "leaf", "grid_index", "outcome", "history"}, rows);
    return kExitOk;
}

int cmd_fixtures(const std::string& dir) {
    const std::filesystem::path base =
        dir.empty() ? resolve_out_path("fixtures") : std::filesystem::path(dir);
    for (const std::string& name : write_fixture_files(base))
        std::printf("%s\n", (base / name).string().c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multivariate default-time toolkit"};
    app.require_subcommand(1);

    std::string model_path, scheme_name, payoff_path, candidate_path;
    std::string realized, out, method = "direct", criterion, times_arg, dir;
    double t = 0.0, t0 = 0.0, eps = 0.0, tol = 1e-10;
    std::uint64_t seed = 1;
    long long count = 1000;

    auto add_model = [&](CLI::App* c) {
        c->add_option("--model", model_path, "model config file")
            ->required();
    };
    auto add_scheme = [&](CLI::App* c) {
        c->add_option("--scheme", scheme_name, "observation flow");
        c->add_option("--t0", t0, "insider cut");
        c->add_option("--eps", eps, "advanced/delayed shift");
    };

    CLI::App* v = app.add_subcommand("validate", "check density axioms");
    add_model(v);
    v->add_option("--tol", tol, "tolerance");
    v->add_option("--out", out, "report path");

    CLI::App* p = app.add_subcommand("predict", "conditional outcome law");
    add_model(p);
    add_scheme(p);
    p->add_option("--t", t, "observation time")->required();
    p->add_option("--realized", realized, "observed outcome, comma list")
        ->required();
    p->add_option("--out", out, "output path (stdout when absent)");

    CLI::App* ce = app.add_subcommand("condexp", "conditional expectation");
    add_model(ce);
    add_scheme(ce);
    ce->add_option("--payoff", payoff_path, "payoff file")->required();
    ce->add_option("--t", t, "observation time")->required();
    ce->add_option("--method", method, "direct|bayes");
    ce->add_option("--realized", realized, "realized regime (closed form)");
    ce->add_option("--out", out, "report path");

    CLI::App* pr = app.add_subcommand("price", "discounted claim value");
    add_model(pr);
    add_scheme(pr);
    pr->add_option("--payoff", payoff_path, "payoff file")->required();
    pr->add_option("--t", t, "valuation time")->required();
    pr->add_option("--method", method, "direct|bayes");
    pr->add_option("--realized", realized, "realized regime (closed form)");
    pr->add_option("--out", out, "report path");

    CLI::App* ck = app.add_subcommand("check-martingale",
                                      "observer-martingale diagnostics");
    add_model(ck);
    ck->add_option("--criterion", criterion,
                   "mtilde|ordered|nonordered|initial|immersion")
        ->required();
    ck->add_option("--candidate", candidate_path,
                   "candidate or weights file");
    ck->add_option("--times", times_arg, "check dates, comma list");
    ck->add_option("--tol", tol, "tolerance");
    ck->add_option("--seed", seed, "seed recorded in the report");
    ck->add_option("--out", out, "report path");

    CLI::App* sim = app.add_subcommand("simulate", "draw joint samples");
    add_model(sim);
    sim->add_option("--seed", seed, "rng seed");
    sim->add_option("--count", count, "number of draws");
    sim->add_option("--out", out, "samples path");

    CLI::App* fx = app.add_subcommand("fixtures", "write bundled configs");
    fx->add_option("--dir", dir, "target directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (v->parsed()) return cmd_validate(model_path, tol, out);
        if (p->parsed())
            return cmd_predict(model_path, scheme_name, t0, eps, t, realized,
                               out);
        if (ce->parsed())
            return cmd_condexp(model_path, scheme_name, t0, eps, payoff_path,
                               t, method, realized, out, false);
        if (pr->parsed())
            return cmd_condexp(model_path, scheme_name, t0, eps, payoff_path,
                               t, method, realized, out, true);
        if (ck->parsed())
            return cmd_check(model_path, criterion, candidate_path, times_arg,
                             tol, seed, out);
        if (sim->parsed()) return cmd_simulate(model_path, seed, count, out);
        if (fx->parsed()) return cmd_fixtures(dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
