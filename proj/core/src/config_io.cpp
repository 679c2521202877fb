#include "mdef/config_io.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdef/fixtures.hpp"

namespace mdef {

using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    require(in.good(), "cannot open " + file.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::filesystem::path& file, const std::string& text) {
    std::ofstream out(file, std::ios::binary);
    require(out.good(), "cannot write " + file.string());
    out << text;
}

json parse(const std::string& text, const std::string& what) {
    json j = json::parse(text, nullptr, false);
    require(!j.is_discarded(), "malformed " + what);
    return j;
}

std::shared_ptr<const ParametricFamily> family_from(const json& a) {
    const std::string name = a.at("family");
    std::vector<double> params = a.at("params").get<std::vector<double>>();
    if (name == "exponential") return independent_exponential(params);
    if (name == "exchangeable-exponential") {
        require(params.size() == 2, "expected [n, rate]");
        return exchangeable_exponential_ordered(
            static_cast<int>(params[0]), params[1]);
    }
    throw std::invalid_argument("unknown family: " + name);
}

json payoff_to_json(const Payoff& p);

Payoff payoff_from_json(const json& j) {
    const std::string kind = j.at("kind");
    const double maturity = j.at("maturity");
    Payoff p = [&]() -> Payoff {
        if (kind == "constant")
            return Payoff::constant(maturity, j.at("value"));
        if (kind == "survival")
            return Payoff::survival(maturity, j.at("coord"),
                                    j.at("threshold"));
        if (kind == "all-survive")
            return Payoff::all_survive(maturity, j.at("threshold"),
                                       j.value("counted", 0));
        if (kind == "default-by")
            return Payoff::default_by(maturity, j.at("coord"),
                                      j.at("threshold"));
        if (kind == "count-defaults")
            return Payoff::count_defaults(maturity, j.at("threshold"),
                                          j.value("counted", 0));
        if (kind == "point-indicator")
            return Payoff::point_indicator(
                maturity, j.at("point").get<std::vector<double>>());
        if (kind == "table")
            return Payoff::table(
                maturity,
                j.at("values").get<std::vector<std::vector<double>>>());
        throw std::invalid_argument("unknown payoff kind: " + kind);
    }();
    if (j.contains("rate")) p = p.with_rate(j.at("rate"));
    return p;
}

}  // namespace

LoadedModel load_model(const std::filesystem::path& file) {
    const std::string text = slurp(file);
    const json j = parse(text, "model config " + file.string());

    const json& m = j.at("model");
    const int n = m.at("n");
    const bool ordered = m.value("ordered", false);
    const bool marks = m.value("marks", false);

    const json& r = j.at("reference");
    const json& a = j.at("alpha");
    const std::string rkind = r.at("kind");

    auto build = [&]() -> DensityModel {
        if (rkind == "lebesgue") {
            ReferenceMeasure ref = ReferenceMeasure::lebesgue_truncated(
                r.at("u_max"), r.value("quad_order", 16));
            require(a.at("kind") == "family",
                    "lebesgue reference needs a parametric density");
            const int t_max = j.at("tree").at("t_max");
            return DensityModel::parametric(std::move(ref), family_from(a),
                                            t_max);
        }
        require(rkind == "grid", "reference kind must be grid or lebesgue");
        ReferenceMeasure ref = ReferenceMeasure::finite_grid(
            r.at("points").get<std::vector<std::vector<double>>>(),
            r.at("weights").get<std::vector<double>>());
        const json& tr = j.at("tree");
        const int t_max = tr.at("t_max");
        std::vector<std::pair<int, double>> edges;
        for (const auto& e : tr.at("edges"))
            edges.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
        ScenarioTree tree = ScenarioTree::build(t_max, edges);
        require(a.at("kind") == "table", "grid reference needs a table");
        const std::vector<double> flat =
            a.at("values").get<std::vector<double>>();
        const std::size_t K = ref.size();
        const std::size_t nodes = edges.size();
        require(flat.size() == std::size_t(t_max + 1) * nodes * K,
                "alpha table has the wrong length");
        std::vector<std::vector<std::vector<double>>> alpha(
            t_max + 1, std::vector<std::vector<double>>(
                           nodes, std::vector<double>(K, 0.0)));
        std::size_t idx = 0;
        for (int t = 0; t <= t_max; ++t)
            for (std::size_t id = 0; id < nodes; ++id)
                for (std::size_t k = 0; k < K; ++k)
                    alpha[t][id][k] = flat[idx++];
        return DensityModel::grid(std::move(ref), std::move(tree),
                                  std::move(alpha), n, ordered, marks);
    };

    LoadedModel out{build(), ObservationScheme{}, "", file};
    require(out.model.n() == n && out.model.ordered() == ordered &&
                out.model.marks() == marks,
            "model section disagrees with the density");
    if (j.contains("scheme")) {
        const json& s = j.at("scheme");
        out.scheme = ObservationScheme::parse(
            s.at("kind"), s.value("t0", 0.0), s.value("eps", 0.0));
    } else {
        out.scheme = scheme_for_model(out.model);
    }
    out.config_hash = hex64(fnv1a64({text.data(), text.size()}));
    return out;
}

std::string serialize_model(const DensityModel& model,
                            const ObservationScheme& scheme) {
    json j;
    j["model"] = {{"n", model.n()},
                  {"ordered", model.ordered()},
                  {"marks", model.marks()}};
    const ReferenceMeasure& ref = model.reference();
    if (model.is_grid()) {
        std::vector<std::vector<double>> points;
        std::vector<double> weights;
        for (std::size_t k = 0; k < ref.size(); ++k) {
            points.push_back(ref.point(k));
            weights.push_back(ref.weight(k));
        }
        j["reference"] = {{"kind", "grid"},
                          {"points", points},
                          {"weights", weights}};
        const ScenarioTree& tree = model.tree();
        std::vector<json> edges;
        for (int id = 0; id < tree.node_count(); ++id) {
            const auto& nd = tree.node(id);
            edges.push_back(json::array(
                {nd.parent, id == 0 ? 1.0 : nd.edge_prob}));
        }
        j["tree"] = {{"t_max", tree.t_max()}, {"edges", edges}};
        std::vector<double> flat;
        for (int t = 0; t <= tree.t_max(); ++t)
            for (int id = 0; id < tree.node_count(); ++id)
                for (std::size_t k = 0; k < ref.size(); ++k)
                    flat.push_back(model.alpha(t, id, k));
        j["alpha"] = {{"kind", "table"}, {"values", flat}};
    } else {
        j["reference"] = {{"kind", "lebesgue"},
                          {"u_max", ref.u_max()},
                          {"quad_order", ref.quad_order()}};
        j["tree"] = {{"t_max", model.t_max()}};
        j["alpha"] = {{"kind", "family"},
                      {"family", model.family()->name()},
                      {"params", model.family()->params()}};
    }
    j["scheme"] = {{"kind", scheme.name()}};
    if (scheme.t0 != 0.0) j["scheme"]["t0"] = scheme.t0;
    if (scheme.eps != 0.0) j["scheme"]["eps"] = scheme.eps;
    return j.dump(2) + "\n";
}

Payoff load_payoff(const std::filesystem::path& file) {
    return payoff_from_json(parse(slurp(file), "payoff " + file.string()));
}

namespace {

json payoff_to_json(const Payoff& p) {
    json j;
    j["maturity"] = p.maturity();
    switch (p.kind()) {
        case PayoffKind::constant:
            j["kind"] = "constant";
            j["value"] = p.value();
            break;
        case PayoffKind::survival:
            j["kind"] = "survival";
            j["coord"] = p.coord();
            j["threshold"] = p.threshold();
            break;
        case PayoffKind::all_survive:
            j["kind"] = "all-survive";
            j["threshold"] = p.threshold();
            j["counted"] = p.counted();
            break;
        case PayoffKind::default_by:
            j["kind"] = "default-by";
            j["coord"] = p.coord();
            j["threshold"] = p.threshold();
            break;
        case PayoffKind::count_defaults:
            j["kind"] = "count-defaults";
            j["threshold"] = p.threshold();
            j["counted"] = p.counted();
            break;
        default:
            throw std::invalid_argument(
                "only closed-form payoffs serialize");
    }
    if (p.rate() != 0.0) j["rate"] = p.rate();
    return j;
}

}  // namespace

std::string serialize_payoff(const Payoff& payoff) {
    return payoff_to_json(payoff).dump(2) + "\n";
}

GMartingaleCandidate load_candidate(const std::filesystem::path& file,
                                    const DensityModel& model) {
    const json j = parse(slurp(file), "candidate " + file.string());
    std::function<GMartingaleCandidate(const json&)> build =
        [&](const json& c) -> GMartingaleCandidate {
        const std::string kind = c.at("kind");
        if (kind == "constant")
            return candidate_constant(model, c.at("value"));
        if (kind == "constructed")
            return construct_G_martingale(
                random_constructor_inputs(model, c.at("seed")), model);
        if (kind == "from-payoff")
            return candidate_from_payoff(model, scheme_for_model(model),
                                         payoff_from_json(c.at("payoff")));
        if (kind == "drift") return candidate_drift(model);
        if (kind == "perturbed")
            return perturb_candidate(build(c.at("base")), model,
                                     scheme_for_model(model), c.at("seed"),
                                     c.value("eps", 1e-3));
        throw std::invalid_argument("unknown candidate kind: " + kind);
    };
    return build(j);
}

ParametrizedEvaluator load_initial_weights(const std::filesystem::path& file,
                                           const DensityModel& model) {
    const json j = parse(slurp(file), "weights " + file.string());
    const std::string kind = j.at("kind");
    const DensityModel* m = &model;
    if (kind == "inverse-beta") {
        return [m](int t, int node, std::size_t k) -> double {
            const double b =
                m->alpha(t, node, k) / m->alpha(0, 0, k);
            return 1.0 / b;
        };
    }
    if (kind == "alpha") {
        return [m](int t, int node, std::size_t k) {
            return m->alpha(t, node, k);
        };
    }
    if (kind == "constant") {
        const double v = j.at("value");
        return [v](int, int, std::size_t) { return v; };
    }
    throw std::invalid_argument("unknown weight kind: " + kind);
}

std::string csv_header(const ReportMeta& meta,
                       const std::vector<std::string>& columns) {
    std::string h = std::string("# mdef ") + library_version + "\n";
    h += "# config-hash=" + meta.config_hash + "\n";
    h += "# seed=" + std::to_string(meta.seed) + "\n";
    h += "# tol=" + format_double(meta.tol) + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
        h += (i ? "," : "") + columns[i];
    h += "\n";
    return h;
}

void write_csv(const std::filesystem::path& file, const ReportMeta& meta,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
    std::string text = csv_header(meta, columns);
    for (const auto& row : rows) {
        require(row.size() == columns.size(), "csv row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i)
            text += (i ? "," : "") + row[i];
        text += "\n";
    }
    spit(file, text);
}

std::filesystem::path resolve_out_path(const std::string& out) {
    std::filesystem::path p(out);
    if (p.is_absolute()) return p;
    if (const char* dir = std::getenv("MDEF_OUT_DIR"))
        return std::filesystem::path(dir) / p;
    return p;
}

std::vector<std::string> write_fixture_files(
    const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const std::string& name : fixture_names()) {
        DensityModel m = fixture_by_name(name);
        const std::string fname = "fixture-" + name + ".model.json";
        spit(dir / fname, serialize_model(m, scheme_for_model(m)));
        written.push_back(fname);
    }
    spit(dir / "survive-2.payoff.json",
         serialize_payoff(Payoff::survival(2.0, 0, 2.0)));
    written.push_back("survive-2.payoff.json");
    spit(dir / "all-survive-2.payoff.json",
         serialize_payoff(Payoff::all_survive(2.0, 2.0)));
    written.push_back("all-survive-2.payoff.json");
    spit(dir / "constructed.candidate.json",
         json({{"kind", "constructed"}, {"seed", 1}}).dump(2) + "\n");
    written.push_back("constructed.candidate.json");
    spit(dir / "perturbed.candidate.json",
         json({{"kind", "perturbed"},
               {"base", {{"kind", "constructed"}, {"seed", 1}}},
               {"seed", 5}})
                 .dump(2) +
             "\n");
    written.push_back("perturbed.candidate.json");
    spit(dir / "inverse-beta.weights.json",
         json({{"kind", "inverse-beta"}}).dump(2) + "\n");
    written.push_back("inverse-beta.weights.json");
    return written;
}

}  // namespace mdef
