#include "qsim/scenario.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "qsim/filiform.hpp"
#include "qsim/parallel.hpp"

namespace qsim {

namespace {

const json& need(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key))
        throw ScenarioError("missing field \"" + key + "\" in " + where);
    return j.at(key);
}

double need_num(const json& j, const std::string& key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number()) throw ScenarioError("field \"" + key + "\" in " + where + " must be a number");
    return v.get<double>();
}

MatrixXd parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw ScenarioError("field in " + where + " must be a matrix (array of rows)");
    MatrixXd M(j.size(), j.front().size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (j[r].size() != j.front().size()) throw ScenarioError("ragged matrix in " + where);
        for (std::size_t c = 0; c < j[r].size(); ++c) M(r, c) = j[r][c].get<double>();
    }
    return M;
}

VectorXd parse_vector(const json& j, const std::string& where) {
    if (!j.is_array()) throw ScenarioError("field in " + where + " must be an array");
    VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace

json normal_form_to_json(const NormalForm& F) {
    json out;
    out["a1"] = rat_str(F.a1());
    out["a2"] = rat_str(F.a2());
    out["p"] = json::array();
    for (const auto& c : F.translation().c) out["p"].push_back(rat_str(c));
    json h;
    h["breaks"] = json::array();
    for (const auto& b : F.h().breaks()) h["breaks"].push_back(rat_str(b));
    h["coeffs"] = json::array();
    for (const auto& piece : F.h().pieces()) {
        json row = json::array();
        for (const auto& c : piece.c) row.push_back(rat_str(c));
        h["coeffs"].push_back(row);
    }
    out["h"] = h;
    return out;
}

NormalForm normal_form_from_json(const json& j) {
    Rat a1 = rat_parse(need(j, "a1", "normal form").get<std::string>());
    Rat a2 = rat_parse(need(j, "a2", "normal form").get<std::string>());
    const json& pj = need(j, "p", "normal form");
    std::vector<Rat> coords;
    for (const auto& c : pj) coords.push_back(rat_parse(c.get<std::string>()));
    int step = static_cast<int>(coords.size()) - 1;
    if (step < 2) throw ScenarioError("normal form: p needs at least 3 coordinates");
    FilPoint p(step, std::move(coords));
    const json& hj = need(j, "h", "normal form");
    std::vector<Rat> breaks;
    for (const auto& b : need(hj, "breaks", "normal form h")) breaks.push_back(rat_parse(b.get<std::string>()));
    std::vector<Poly> pieces;
    for (const auto& row : need(hj, "coeffs", "normal form h")) {
        std::vector<Rat> c;
        for (const auto& v : row) c.push_back(rat_parse(v.get<std::string>()));
        pieces.push_back(Poly(std::move(c)));
    }
    if (pieces.size() != breaks.size() + 1)
        throw ScenarioError("normal form h: need one more coefficient row than breakpoints");
    return NormalForm(step, a1, a2, p, PiecewisePoly(std::move(breaks), std::move(pieces)));
}

SampledSpace load_space(const json& j) {
    std::string kind = need(j, "kind", "space").get<std::string>();
    SpaceSpec spec;
    int window = 0;
    if (kind == "power") {
        spec = SpaceSpec::power(static_cast<int>(need_num(j, "dim", "space")),
                                need_num(j, "beta", "space"));
    } else if (kind == "parabolic" || kind == "parabolic_madic") {
        std::vector<double> alphas = need(j, "alphas", "space").get<std::vector<double>>();
        std::vector<int> dims = need(j, "block_dims", "space").get<std::vector<int>>();
        ParabolicSpec par(alphas, dims, j.value("scale", 1.0));
        if (kind == "parabolic")
            spec = SpaceSpec::parabolic(par);
        else
            spec = SpaceSpec::parabolic_madic(par, static_cast<int>(need_num(j, "m", "space")));
    } else if (kind == "madic") {
        spec = SpaceSpec::madic(static_cast<int>(need_num(j, "m", "space")));
    } else if (kind == "power_madic") {
        spec = SpaceSpec::power_madic(static_cast<int>(need_num(j, "dim", "space")),
                                      need_num(j, "beta", "space"),
                                      static_cast<int>(need_num(j, "m", "space")));
    } else {
        throw ScenarioError("unknown space kind \"" + kind + "\"");
    }
    if (spec.has_madic()) window = static_cast<int>(need_num(j, "window", "space"));

    const json& pts = need(j, "points", "space");
    if (!pts.is_array() || pts.empty()) throw ScenarioError("space.points must be a nonempty array");
    std::vector<SamplePoint> points;
    int rd = spec.real_dim();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const json& row = pts[i];
        int expect = rd + (spec.has_madic() ? window : 0);
        if (!row.is_array() || static_cast<int>(row.size()) != expect)
            throw ScenarioError("space.points[" + std::to_string(i) + "] must have " +
                                std::to_string(expect) + " entries");
        SamplePoint p;
        p.x = VectorXd(rd);
        for (int k = 0; k < rd; ++k) p.x[k] = row[k].get<double>();
        if (spec.has_madic()) {
            std::vector<int> digits(window);
            for (int k = 0; k < window; ++k) digits[k] = row[rd + k].get<int>();
            p.u = MadicNumber(*spec.madic_base, 0, digits);
        }
        points.push_back(std::move(p));
    }
    int basepoint = static_cast<int>(need_num(j, "basepoint", "space"));
    return SampledSpace(spec, std::move(points), basepoint);
}

HField load_hfield(const json& j, int target_dim) {
    std::string kind = need(j, "kind", "h").get<std::string>();
    if (kind == "zero") return HField::zero(target_dim);
    if (kind == "const") return HField::constant(parse_vector(need(j, "value", "h"), "h.value"));
    if (kind == "hat")
        return HField::hat(target_dim, static_cast<int>(j.value("coord", 0)),
                           need_num(j, "center", "h"), need_num(j, "halfwidth", "h"),
                           parse_vector(need(j, "heights", "h"), "h.heights"));
    if (kind == "linear") return HField::linear(parse_matrix(need(j, "matrix", "h"), "h.matrix"));
    if (kind == "table") return HField::table(parse_matrix(need(j, "values", "h"), "h.values"));
    if (kind == "sum") {
        std::vector<HField> terms;
        for (const auto& t : need(j, "terms", "h")) terms.push_back(load_hfield(t, target_dim));
        return HField::sum(std::move(terms));
    }
    throw ScenarioError("unknown h kind \"" + kind + "\"");
}

SampleMap load_sigma(const json& j, const SampledSpace& Y) {
    std::string kind = need(j, "kind", "sigma").get<std::string>();
    if (kind == "identity") return SampleMap::identity();
    if (kind == "permutation")
        return SampleMap::permutation(need(j, "indices", "sigma").get<std::vector<int>>());
    if (kind == "affine")
        return SampleMap::real_affine(need_num(j, "scale", "sigma"),
                                      parse_matrix(need(j, "orthogonal", "sigma"), "sigma.orthogonal"),
                                      parse_vector(need(j, "offset", "sigma"), "sigma.offset"));
    if (kind == "madic_translate") {
        if (!Y.spec().has_madic()) throw ScenarioError("sigma: madic_translate on a space without m-adics");
        std::vector<int> digits = need(j, "digits", "sigma").get<std::vector<int>>();
        int window = static_cast<int>(need_num(j, "window", "sigma"));
        return SampleMap::madic_translate(MadicNumber(*Y.spec().madic_base, 0, digits), window);
    }
    throw ScenarioError("unknown sigma kind \"" + kind + "\"");
}

GroupSpec load_group(const json& j, const SampledSpace& Y, int active_dim) {
    GroupSpec spec;
    std::string kind = j.value("kind", "finite");
    if (kind == "finite")
        spec.kind = GroupKind::Finite;
    else if (kind == "free-abelian")
        spec.kind = GroupKind::FreeAbelian;
    else if (kind == "user-words")
        spec.kind = GroupKind::UserWords;
    else
        throw ScenarioError("unknown group kind \"" + kind + "\"");

    const json& gens = need(j, "generators", "group");
    if (!gens.is_object() || gens.empty()) throw ScenarioError("group.generators must be a nonempty object");
    for (auto it = gens.begin(); it != gens.end(); ++it) {
        const json& g = it.value();
        double a = need_num(g, "a", "generator " + it.key());
        MatrixXd A = parse_matrix(need(g, "A", "generator " + it.key()), "generator " + it.key() + ".A");
        if (A.rows() != active_dim)
            throw ScenarioError("generator " + it.key() + ": block size must match active_dim");
        VectorXd x_off = g.contains("x_off") ? parse_vector(g.at("x_off"), "x_off")
                                             : VectorXd::Zero(active_dim);
        HField h = g.contains("h") ? load_hfield(g.at("h"), active_dim) : HField::zero(active_dim);
        SampleMap sigma = g.contains("sigma") ? load_sigma(g.at("sigma"), Y) : SampleMap::identity();
        spec.names.push_back(it.key());
        spec.gens.push_back(StructuredMap(a, A, x_off, h, sigma));
    }
    spec.folner = load_folner(need(j, "folner", "group"), spec);
    return spec;
}

std::vector<std::vector<Word>> load_folner(const json& j, const GroupSpec& spec) {
    if (!j.is_array() || j.empty()) throw ScenarioError("group.folner must be a nonempty array of stages");
    auto parse_word = [&](const json& wj) {
        Word w;
        for (const auto& letter : wj) {
            std::string name = letter.at(0).get<std::string>();
            int exp = letter.size() > 1 ? letter.at(1).get<int>() : 1;
            int g = spec.find(name);
            for (int i = 0; i < std::abs(exp); ++i) w.letters.push_back({g, exp > 0 ? 1 : -1});
        }
        w.reduce();
        return w;
    };
    std::vector<std::vector<Word>> schedule;
    for (const json& stage : j) {
        if (stage.contains("words")) {
            std::vector<Word> ws;
            for (const auto& wj : stage.at("words")) ws.push_back(parse_word(wj));
            schedule.push_back(std::move(ws));
        } else if (stage.contains("cyclic")) {
            Word base = parse_word(stage.at("cyclic"));
            int lo = stage.value("from", 0);
            int hi = static_cast<int>(need_num(stage, "to", "folner stage"));
            schedule.push_back(GroupSpec::power_chain(base, lo, hi));
        } else if (stage.contains("box")) {
            int s = stage.at("box").get<int>();
            auto boxes = GroupSpec::abelian_boxes(static_cast<int>(spec.gens.size()), {s});
            schedule.push_back(std::move(boxes.front()));
        } else {
            throw ScenarioError("folner stage needs \"words\", \"cyclic\" or \"box\"");
        }
    }
    return schedule;
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

namespace {

json axiom_report_json(const AxiomReport& rep) {
    json out;
    out["pairs_checked"] = rep.pairs_checked;
    out["triples_checked"] = rep.triples_checked;
    out["ultrametric_checked"] = rep.ultrametric_checked;
    out["violations"] = json::array();
    for (std::size_t i = 0; i < rep.violations.size() && i < 32; ++i) {
        const auto& v = rep.violations[i];
        out["violations"].push_back({{"axiom", v.axiom}, {"i", v.i}, {"j", v.j}, {"k", v.k},
                                     {"amount", v.amount}});
    }
    out["violation_count"] = rep.violations.size();
    out["passed"] = rep.passed();
    return out;
}

struct TraceRow {
    int stage;
    std::size_t folner_size;
    double residual;
    double max_defect;
    double wall_ms;
};

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
    std::ostringstream os;
    os << "stage,folner_size,residual,max_defect,wall_ms\n";
    for (const auto& r : rows) {
        os << r.stage << "," << r.folner_size << ",";
        os.precision(17);
        os << r.residual << "," << r.max_defect << "," << r.wall_ms << "\n";
    }
    return os.str();
}

void truncate_schedule(std::vector<std::vector<Word>>& folner, const json& cfg) {
    if (!cfg.contains("_max_words")) return;
    std::size_t cap = cfg.at("_max_words").get<std::size_t>();
    for (auto& stage : folner)
        if (stage.size() > cap) stage.resize(cap);
}

double max_of(const std::map<std::string, double>& m) {
    double best = 0;
    for (const auto& [k, v] : m) best = std::max(best, v);
    return best;
}

RunResult pipeline_conjugate(const json& cfg, unsigned long seed, int threads, double residual_tol,
                             double defect_tol) {
    RunResult out;
    SampledSpace Y = load_space(need(cfg, "space", "config"));
    int active_dim = static_cast<int>(cfg.value("active_dim", 1));
    double beta = cfg.value("beta", 1.0);
    GroupSpec spec = load_group(need(cfg, "group", "config"), Y, active_dim);
    truncate_schedule(spec.folner, cfg);
    WordAction action(Y, spec, beta);

    auto t0 = std::chrono::steady_clock::now();
    int radius = static_cast<int>(cfg.value("uniformity_radius", 2));
    UniformityReport uni = uniformity_check(action, radius, 48, seed);
    HislipReport hislip = hislip_check(action, uni, 1e-9);

    FolnerOutcome avg = folner_average(action, residual_tol, threads);

    std::vector<int> all_idx(Y.size());
    for (int i = 0; i < Y.size(); ++i) all_idx[i] = i;

    json gens_json = json::object();
    double worst_defect_after = 0;
    bool monotone_ok = true;
    for (std::size_t g = 0; g < spec.gens.size(); ++g) {
        DefectSample before =
            structured_defect(action, spec.gens[g], all_idx, cfg.value("defect_pairs", 256),
                              seed + 13 * g);
        ConjugatedMap cm = conjugate(action, static_cast<int>(g), avg.h0);
        DefectSample after = structured_defect(action, cm.map, cm.covered,
                                               cfg.value("defect_pairs", 256), seed + 13 * g);
        worst_defect_after = std::max(worst_defect_after, after.defect);
        // Monotone certificate: defect_after <= defect_before + 2*residual/C_min.
        double bound = before.defect + 2.0 * avg.final_residual / std::max(before.inf_ratio, 1e-300);
        if (after.defect > bound + 1e-12) monotone_ok = false;
        json gj;
        gj["a"] = spec.gens[g].a;
        gj["defect_before"] = before.defect;
        gj["defect_after"] = after.defect;
        gj["conjugated_h_norm"] = cm.h_part_norm;
        gj["covered_points"] = cm.covered.size();
        gj["monotone_bound"] = bound;
        auto it = uni.C.find(spec.names[g]);
        if (it != uni.C.end()) gj["C"] = it->second;
        gens_json[spec.names[g]] = gj;
    }
    double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    bool certified = avg.certified && worst_defect_after <= defect_tol && monotone_ok;
    out.exit_code = certified ? 0 : 1;

    json rep;
    rep["pipeline"] = "conjugate";
    rep["certified"] = certified;
    rep["seed"] = seed;
    rep["tolerances"] = {{"residual", residual_tol}, {"defect", defect_tol}};
    rep["uniformity"] = {{"M", uni.M}};
    json hj = json::array();
    for (const auto& e : hislip.entries)
        hj.push_back({{"generator", e.generator}, {"c_sigma", e.c_sigma}, {"a_beta", e.a_beta},
                      {"lip_h", e.lip_h}, {"C", e.C}, {"sigma_matches", e.sigma_matches},
                      {"lip_bounded", e.lip_bounded}, {"sandwich", e.sandwich}});
    rep["hislip"] = hj;
    rep["folner"] = {{"stage_sizes", avg.stage_sizes}, {"residuals", avg.residuals},
                     {"final_residual", avg.final_residual}, {"orbit_bound", avg.orbit_bound},
                     {"certified", avg.certified}, {"warned_nonmonotone", avg.warned_nonmonotone}};
    std::vector<std::vector<double>> h0_vals(avg.h0.values.rows());
    for (int i = 0; i < avg.h0.values.rows(); ++i)
        for (int k = 0; k < avg.h0.values.cols(); ++k) h0_vals[i].push_back(avg.h0.values(i, k));
    rep["h0"] = {{"values", h0_vals}};
    rep["generators"] = gens_json;
    rep["monotone_certificate"] = monotone_ok;
    rep["notes"] = json::array(
        {"residuals and defects are quantified over sample pairs whose images stay sampled",
         "off-sample evaluation uses per-coordinate McShane extension; the joint Euclidean "
         "constant can grow by sqrt(n)"});
    if (!avg.message.empty()) rep["message"] = avg.message;
    out.report = rep;

    std::vector<TraceRow> trace;
    for (std::size_t k = 0; k < avg.residuals.size(); ++k)
        trace.push_back({static_cast<int>(k), avg.stage_sizes[k], avg.residuals[k],
                         k + 1 == avg.residuals.size() ? worst_defect_after
                                                       : std::numeric_limits<double>::quiet_NaN(),
                         k + 1 == avg.residuals.size() ? wall : 0.0});
    out.trace_csv = trace_to_csv(trace);

    std::ostringstream sum;
    sum << "pipeline: conjugate\n"
        << "generators: " << spec.gens.size() << ", sample points: " << Y.size() << "\n"
        << "uniformity M = " << uni.M << ", hislip " << (hislip.passed() ? "passed" : "FAILED") << "\n"
        << "final residual = " << avg.final_residual << " (target " << residual_tol << ")\n"
        << "worst defect after conjugation = " << worst_defect_after << " (target " << defect_tol
        << ")\n"
        << (certified ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    if (!avg.message.empty()) sum << avg.message << "\n";
    out.summary = sum.str();
    return out;
}

MadicNumber madic_from_row(const json& row, int m, int window, const std::string& where) {
    std::vector<int> digits(window);
    if (!row.is_array() || static_cast<int>(row.size()) != window)
        throw ScenarioError(where + ": need " + std::to_string(window) + " digits");
    for (int k = 0; k < window; ++k) digits[k] = row[k].get<int>();
    return MadicNumber(m, 0, digits);
}

RunResult pipeline_tukia(const json& cfg, unsigned long seed, int threads, double residual_tol,
                         double defect_tol) {
    RunResult out;
    const json& sj = need(cfg, "space", "config");
    std::string kind = need(sj, "kind", "space").get<std::string>();
    if (kind != "parabolic" && kind != "parabolic_madic")
        throw ScenarioError("tukia-induction needs a parabolic or parabolic_madic space");

    TukiaScenario sc{ParabolicSpec(need(sj, "alphas", "space").get<std::vector<double>>(),
                                   need(sj, "block_dims", "space").get<std::vector<int>>(),
                                   sj.value("scale", 1.0)),
                     std::nullopt,
                     nullptr,
                     {},
                     {},
                     GroupKind::Finite,
                     {},
                     residual_tol,
                     defect_tol,
                     threads,
                     seed,
                     static_cast<int>(cfg.value("defect_pairs", 256))};
    if (kind == "parabolic_madic") sc.madic_base = static_cast<int>(need_num(sj, "m", "space"));
    sc.full_space = std::make_shared<SampledSpace>(load_space(sj));
    const SampledSpace& full = *sc.full_space;

    int r = sc.parabolic.blocks();
    const json& gens = need(cfg, "triangular_generators", "config");
    if (!gens.is_object() || gens.empty())
        throw ScenarioError("triangular_generators must be a nonempty object");
    GroupSpec name_holder;  // word parsing needs the name list
    for (auto it = gens.begin(); it != gens.end(); ++it) {
        const json& g = it.value();
        TriangularGen tg;
        tg.a = need_num(g, "a", "generator " + it.key());
        const json& blocks = need(g, "blocks", "generator " + it.key());
        const json& hs = need(g, "h", "generator " + it.key());
        if (static_cast<int>(blocks.size()) != r || static_cast<int>(hs.size()) != r)
            throw ScenarioError("generator " + it.key() + ": need one block and one h per level");
        for (int j = 0; j < r; ++j) {
            tg.blocks.push_back(parse_matrix(blocks[j], "generator " + it.key() + ".blocks"));
            tg.h.push_back(load_hfield(hs[j], sc.parabolic.block_dims[j]));
        }
        if (g.contains("madic_sigma")) {
            if (!sc.madic_base) throw ScenarioError("madic_sigma on a space without m-adics");
            tg.madic_sigma = load_sigma(g.at("madic_sigma"), full);
            if (tg.madic_sigma.kind() != SampleMap::Kind::Identity &&
                tg.madic_sigma.kind() != SampleMap::Kind::MadicTranslate)
                throw ScenarioError(
                    "madic_sigma must be an identity or madic_translate isometry");
        }
        sc.names.push_back(it.key());
        sc.gens.push_back(std::move(tg));
        name_holder.names.push_back(it.key());
        name_holder.gens.emplace_back();
    }
    std::string gk = cfg.value("group_kind", "finite");
    sc.kind = gk == "free-abelian" ? GroupKind::FreeAbelian
                                   : (gk == "user-words" ? GroupKind::UserWords : GroupKind::Finite);
    sc.folner = load_folner(need(cfg, "folner", "config"), name_holder);
    truncate_schedule(sc.folner, cfg);

    auto t0 = std::chrono::steady_clock::now();
    ConjugationReport rep = tukia_induction(sc);
    double wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    out.exit_code = rep.certified ? 0 : 1;
    json rj;
    rj["pipeline"] = "tukia-induction";
    rj["certified"] = rep.certified;
    rj["seed"] = seed;
    rj["tolerances"] = {{"residual", residual_tol}, {"defect", defect_tol}};
    rj["stages"] = json::array();
    std::vector<TraceRow> trace;
    for (const auto& st : rep.stages) {
        json sjj;
        sjj["block"] = st.block + 1;
        sjj["folner_sizes"] = st.folner_sizes;
        sjj["residuals"] = st.residuals;
        sjj["final_residual"] = st.final_residual;
        sjj["orbit_bound"] = st.orbit_bound;
        sjj["certified"] = st.certified;
        sjj["defect_before"] = st.defect_before;
        sjj["defect_after"] = st.defect_after;
        rj["stages"].push_back(sjj);
        for (std::size_t k = 0; k < st.residuals.size(); ++k)
            trace.push_back({st.block + 1, st.folner_sizes[k], st.residuals[k],
                             k + 1 == st.residuals.size() ? max_of(st.defect_after)
                                                          : std::numeric_limits<double>::quiet_NaN(),
                             k + 1 == st.residuals.size() ? st.wall_ms : 0.0});
    }
    rj["final_defect"] = rep.final_defect;
    rj["scale_consistency"] = rep.scale_consistency;
    rj["generator_scale"] = rep.generator_scale;
    rj["notes"] = rep.notes;
    if (!rep.failure.empty()) rj["failure"] = rep.failure;
    out.report = rj;
    out.trace_csv = trace_to_csv(trace);

    std::ostringstream sum;
    sum << "pipeline: tukia-induction\n"
        << "blocks: " << r << (sc.madic_base ? " + m-adic factor" : "") << ", sample points: "
        << full.size() << "\n";
    for (const auto& st : rep.stages)
        sum << "block " << st.block + 1 << ": residual " << st.final_residual << ", max defect after "
            << max_of(st.defect_after) << "\n";
    sum << "final defects (target metric): max " << max_of(rep.final_defect) << " (target "
        << defect_tol << ")\n"
        << "scale consistency: max deviation " << max_of(rep.scale_consistency) << "\n"
        << (rep.certified ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    if (!rep.failure.empty()) sum << rep.failure << "\n";
    sum << "(wall " << wall << " ms)\n";
    out.summary = sum.str();
    return out;
}

RunResult pipeline_verify_metrics(const json& cfg, unsigned long seed) {
    RunResult out;
    SampledSpace Y = load_space(need(cfg, "space", "config"));
    AxiomReport rep = verify_metric_axioms(Y, cfg.value("tol", 1e-12),
                                           static_cast<long>(cfg.value("max_triples", 200000)), seed);
    out.exit_code = rep.passed() ? 0 : 1;
    out.report = {{"pipeline", "verify-metrics"}, {"certified", rep.passed()},
                  {"axioms", axiom_report_json(rep)}};
    out.trace_csv = trace_to_csv({});
    std::ostringstream sum;
    sum << "pipeline: verify-metrics\npairs " << rep.pairs_checked << ", triples "
        << rep.triples_checked << ", violations " << rep.violations.size() << "\n"
        << (rep.passed() ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    out.summary = sum.str();
    return out;
}

RunResult pipeline_verify_filiform(const json& cfg, unsigned long seed) {
    RunResult out;
    int n = static_cast<int>(cfg.value("step", 3));
    int triples = static_cast<int>(cfg.value("triples", 200));
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<long> num(-6, 6);
    std::uniform_int_distribution<long> den(1, 4);
    auto rand_point = [&](int step) {
        FilPoint p(step);
        for (int j = 0; j <= step; ++j) p.c[j] = rat_from_long(num(rng), den(rng));
        return p;
    };

    json checks = json::array();
    bool all_ok = true;
    auto record = [&](const std::string& name, bool ok, const std::string& detail = "") {
        checks.push_back({{"check", name}, {"passed", ok}, {"detail", detail}});
        all_ok = all_ok && ok;
    };

    // Exact group law against the basis example and associativity.
    FilPoint e1 = FilPoint::basis(3, 1), e2 = FilPoint::basis(3, 2);
    FilPoint prod = fil_mul(e1, e2);
    FilPoint expect(3, {Rat(1), Rat(1), Rat(1, 2), Rat(1, 12)});
    record("fil_mul(e1,e2) = (1,1,1/2,1/12)", prod == expect);

    bool assoc = true;
    for (int t = 0; t < triples && assoc; ++t) {
        FilPoint p = rand_point(n), q = rand_point(n), r = rand_point(n);
        assoc = fil_mul(fil_mul(p, q), r) == fil_mul(p, fil_mul(q, r));
    }
    record("associativity (exact, " + std::to_string(triples) + " triples)", assoc);

    bool inv = true;
    for (int t = 0; t < 32 && inv; ++t) {
        FilPoint p = rand_point(n);
        inv = fil_mul(p, -p).is_zero() && fil_mul(p, FilPoint(n)) == p;
    }
    record("identity and inverses (exact)", inv);

    bool dil = true;
    for (int t = 0; t < 32 && dil; ++t) {
        FilPoint p = rand_point(n), q = rand_point(n);
        Rat s = rat_from_long(1 + (t % 5), 1 + (t % 3));
        dil = fil_dilate(s, fil_mul(p, q)) == fil_mul(fil_dilate(s, p), fil_dilate(s, q));
    }
    record("dilations are automorphisms (exact)", dil);

    double worst = 0;
    for (int t = 0; t < 64; ++t) {
        FilPoint p = rand_point(n);
        double tt = 0.25 + 0.25 * (t % 12);
        double lhs = homogeneous_norm(fil_dilate(Rat(tt), p));
        double rhs = tt * homogeneous_norm(p);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
    }
    record("norm homogeneity ||delta_t p|| = t||p||", worst <= 1e-12, "max rel err " + std::to_string(worst));

    // Shear composition: F_g o F_h = F_{g+h}.
    PiecewisePoly hp = PiecewisePoly::hat(Rat(0), Rat(1), Rat(1, 2));
    PiecewisePoly gp = PiecewisePoly::linear(Rat(1, 3));
    NormalForm Fh = NormalForm::from_shear(n, hp);
    NormalForm Fg = NormalForm::from_shear(n, gp);
    record("F_g o F_h = F_{g+h} (exact)", Fg.compose(Fh).equals(NormalForm::from_shear(n, gp + hp)));

    std::vector<NormalForm> maps;
    if (cfg.contains("maps")) {
        for (const auto& mj : cfg.at("maps")) {
            NormalForm F = normal_form_from_json(mj);
            if (F.step() != n) throw ScenarioError("maps: step mismatch with the configured step");
            // serialization round-trips exactly
            if (!normal_form_from_json(normal_form_to_json(F)).equals(F))
                throw ScenarioError("maps: serialization round-trip failed");
            maps.push_back(std::move(F));
        }
    }
    maps.push_back(NormalForm(n, Rat(2), Rat(3), rand_point(n), hp));
    maps.push_back(NormalForm(n, Rat(1), Rat(1), rand_point(n), gp));
    maps.push_back(NormalForm::from_shear(n, hp + gp));
    FilPoint z(n);
    z.c[2] = Rat(1, 2);
    maps.push_back(NormalForm::from_translation(z));
    SolvabilityReport sol = solvability_witness(maps);
    record("pi1/pi2 homomorphisms, kernel abelian", sol.passed(),
           "max pointwise defect " + std::to_string(sol.max_pointwise_defect));

    out.exit_code = all_ok ? 0 : 1;
    out.report = {{"pipeline", "verify-filiform"}, {"certified", all_ok}, {"step", n},
                  {"checks", checks}};
    out.trace_csv = trace_to_csv({});
    std::ostringstream sum;
    sum << "pipeline: verify-filiform (step " << n << ")\n";
    for (const auto& c : checks)
        sum << (c["passed"].get<bool>() ? "PASS " : "FAIL ") << c["check"].get<std::string>() << "\n";
    sum << (all_ok ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    out.summary = sum.str();
    return out;
}

RunResult pipeline_verify_cocycle(const json& cfg, unsigned long seed, int threads, double tol) {
    RunResult out;
    SampledSpace Y = load_space(need(cfg, "space", "config"));
    int active_dim = static_cast<int>(cfg.value("active_dim", 1));
    double beta = cfg.value("beta", 1.0);
    GroupSpec spec = load_group(need(cfg, "group", "config"), Y, active_dim);
    WordAction action(Y, spec, beta);
    Cocycle b = cocycle_of_action(action);

    int length = static_cast<int>(cfg.value("word_length", 3));
    std::vector<Word> words = {Word::identity()};
    std::size_t lo = 0;
    for (int l = 0; l < length; ++l) {
        std::size_t hi = words.size();
        for (std::size_t i = lo; i < hi; ++i)
            for (int g = 0; g < static_cast<int>(spec.gens.size()); ++g)
                for (int e : {1, -1}) words.push_back(words[i].then(g, e));
        lo = hi;
    }
    std::vector<std::pair<Word, Word>> pairs;
    for (const auto& u : words)
        for (const auto& v : words) pairs.push_back({u, v});
    double residual = b.check(pairs, CocycleOrientation::GammaStar, threads);

    UniformityReport uni = uniformity_check(action, std::min(length, 3), 32, seed);
    double bound = std::pow(uni.M, 2.0 / beta);
    double sup_b = 0;
    for (const auto& w : words) sup_b = std::max(sup_b, lip_norm(b.value(w), threads));

    bool ok = residual <= tol && sup_b <= bound + tol;
    out.exit_code = ok ? 0 : 1;
    out.report = {{"pipeline", "verify-cocycle"}, {"certified", ok},
                  {"residual", residual}, {"tolerance", tol},
                  {"word_pairs", pairs.size()},
                  {"orbit_sup", sup_b}, {"orbit_bound_M_2_beta", bound}};
    out.trace_csv = trace_to_csv({});
    std::ostringstream sum;
    sum << "pipeline: verify-cocycle\nmax residual over " << pairs.size() << " word pairs: "
        << residual << " (tol " << tol << ")\n"
        << "sup ||b_w|| = " << sup_b << " <= M^(2/beta) + tol = " << bound + tol << "\n"
        << (ok ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    out.summary = sum.str();
    return out;
}

}  // namespace

RunResult run_scenario_json(const json& config, const RunOverrides& ov) {
    RunResult out;
    try {
        std::string pipeline = need(config, "pipeline", "config").get<std::string>();
        unsigned long seed = ov.seed.value_or(config.value("seed", 1ul));
        int threads = ov.threads.value_or(static_cast<int>(config.value("threads", 1)));
        json tols = config.value("tolerances", json::object());
        double residual_tol = ov.tol.value_or(tols.value("residual", 1e-6));
        double defect_tol = tols.value("defect", 2.0 * residual_tol);
        double cocycle_tol = ov.tol.value_or(tols.value("cocycle", 1e-10));
        if (!(residual_tol > 0) || !(defect_tol > 0) || !(cocycle_tol > 0))
            throw ScenarioError("tolerances must be positive");

        json cfg = config;
        if (ov.max_words) cfg["_max_words"] = *ov.max_words;

        if (pipeline == "conjugate")
            out = pipeline_conjugate(cfg, seed, threads, residual_tol, defect_tol);
        else if (pipeline == "tukia-induction")
            out = pipeline_tukia(cfg, seed, threads, residual_tol, defect_tol);
        else if (pipeline == "verify-metrics")
            out = pipeline_verify_metrics(cfg, seed);
        else if (pipeline == "verify-filiform")
            out = pipeline_verify_filiform(cfg, seed);
        else if (pipeline == "verify-cocycle")
            out = pipeline_verify_cocycle(cfg, seed, threads, cocycle_tol);
        else
            throw ScenarioError("unknown pipeline \"" + pipeline + "\"");
        out.report["seed"] = seed;
    } catch (const ScenarioError& e) {
        out.exit_code = 2;
        out.summary = std::string("input error: ") + e.what() + "\n";
        out.report = {{"error", e.what()}, {"exit_code", 2}};
    } catch (const std::invalid_argument& e) {
        out.exit_code = 2;
        out.summary = std::string("input error: ") + e.what() + "\n";
        out.report = {{"error", e.what()}, {"exit_code", 2}};
    } catch (const nlohmann::json::exception& e) {
        out.exit_code = 2;
        out.summary = std::string("input error: malformed config: ") + e.what() + "\n";
        out.report = {{"error", e.what()}, {"exit_code", 2}};
    }
    out.report["exit_code"] = out.exit_code;
    return out;
}

RunResult run_scenario_file(const std::filesystem::path& path, const RunOverrides& ov) {
    std::ifstream in(path);
    if (!in) {
        RunResult out;
        out.exit_code = 2;
        out.summary = "input error: cannot open " + path.string() + "\n";
        out.report = {{"error", out.summary}, {"exit_code", 2}};
        return out;
    }
    json config;
    try {
        config = json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        RunResult out;
        out.exit_code = 2;
        out.summary = std::string("input error: ") + e.what() + "\n";
        out.report = {{"error", e.what()}, {"exit_code", 2}};
        return out;
    }
    return run_scenario_json(config, ov);
}

void write_outputs(const RunResult& result, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        std::ofstream f(out_dir / "report.json");
        f << result.report.dump(2) << "\n";
    }
    {
        std::ofstream f(out_dir / "trace.csv");
        f << result.trace_csv;
    }
    {
        std::ofstream f(out_dir / "summary.txt");
        f << result.summary;
    }
}

}  // namespace qsim
