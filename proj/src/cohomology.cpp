#include "qsim/cohomology.hpp"

#include <cmath>
#include <stdexcept>

#include "qsim/parallel.hpp"

namespace qsim {

Cocycle Cocycle::of_action(const WordAction& action) {
    Cocycle b;
    b.action_ = &action;
    return b;
}

Cocycle Cocycle::with_values(const WordAction& action, std::vector<LipschitzSample> generator_values) {
    if (generator_values.size() != action.group().gens.size())
        throw std::invalid_argument("cocycle: need one value per generator");
    Cocycle b;
    b.action_ = &action;
    b.override_values_ = std::move(generator_values);
    return b;
}

LipschitzSample Cocycle::pi_of(const Word& w, const LipschitzSample& h) const {
    const SampledSpace& Y = action_->space();
    MatrixXd vals(Y.size(), h.target_dim());
    for (int i = 0; i < Y.size(); ++i) {
        auto v = action_->pi_apply(w, h, i, /*allow_extend=*/false);
        if (!v)
            throw std::invalid_argument(
                "cocycle: sample not closed under the word's sigma; close the sample under the "
                "generators");
        vals.row(i) = v->transpose();
    }
    return LipschitzSample(Y, action_->beta(), std::move(vals));
}

LipschitzSample Cocycle::value(const Word& w) const {
    if (override_values_ && w.length() == 1 && w.letters[0].second > 0)
        return (*override_values_)[w.letters[0].first];
    if (override_values_ && w.length() == 1)
        return -1.0 * pi_of(w, (*override_values_)[w.letters[0].first]);
    return action_->cocycle_sample(w);
}

VectorXd Cocycle::value_at(const Word& w, const SamplePoint& y) const {
    if (!override_values_ || w.length() != 1) return action_->cocycle_eval(w, y);
    auto idx = action_->space().locate(y, 1e-9);
    if (!idx)
        throw std::invalid_argument(
            "cocycle: sample not closed under the word's sigma; close the sample under the "
            "generators");
    return value(w).at(*idx);
}

double Cocycle::check(const std::vector<std::pair<Word, Word>>& pairs,
                      CocycleOrientation orientation, int threads) const {
    if (pairs.empty()) return 0.0;
    const SampledSpace& Y = action_->space();
    const SamplePoint& y0 = Y.point(Y.basepoint());
    std::vector<double> residuals(pairs.size(), 0.0);
    // Word evaluation is read-only; compute residuals pairwise then reduce in order.
    parallel_for(pairs.size(), threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t t = lo; t < hi; ++t) {
            const Word& u = pairs[t].first;
            const Word& v = pairs[t].second;
            // Gamma:      b_{uv} = b_u + pi_u b_v
            // GammaStar:  b_{uv} = b_v + pi_v b_u
            const Word& outer = orientation == CocycleOrientation::Gamma ? u : v;
            const Word& innerw = orientation == CocycleOrientation::Gamma ? v : u;
            double a = action_->word_scale(outer);
            MatrixXd Tinv = action_->word_block(outer).transpose() / a;
            SamplePoint sy0 = action_->word_sigma(outer, y0);
            VectorXd inner_at_base = value_at(innerw, sy0);
            MatrixXd vals(Y.size(), action_->active_dim());
            for (int i = 0; i < Y.size(); ++i) {
                SamplePoint sy = action_->word_sigma(outer, Y.point(i));
                VectorXd rhs = value_at(outer, Y.point(i)) + Tinv * (value_at(innerw, sy) - inner_at_base);
                vals.row(i) = (value_at(u * v, Y.point(i)) - rhs).transpose();
            }
            residuals[t] = lip_norm(LipschitzSample(Y, action_->beta(), std::move(vals)));
        }
    });
    double best = 0;
    for (double r : residuals) best = std::max(best, r);
    return best;
}

AffineAction::AffineAction(const Cocycle& b) : b_(&b) {}

std::pair<LipschitzSample, std::vector<int>> AffineAction::apply(const Word& w,
                                                                 const LipschitzSample& v,
                                                                 bool allow_extend) const {
    return b_->action().affine_image(w, v, allow_extend);
}

LipschitzSample AffineAction::orbit_of_zero(const Word& w) const { return b_->value(w); }

Cocycle cocycle_of_action(const WordAction& action) { return Cocycle::of_action(action); }

AffineAction action_of_cocycle(const Cocycle& b, const std::vector<std::pair<Word, Word>>& check_pairs,
                               double tol) {
    double r = b.check(check_pairs);
    if (r > tol)
        throw std::invalid_argument("action_of_cocycle: cocycle identity residual " +
                                    std::to_string(r) + " exceeds tolerance");
    return AffineAction(b);
}

CoboundaryResult solve_coboundary(const Cocycle& b, double tol, int threads) {
    const WordAction& action = b.action();
    const SampledSpace& Y = action.space();
    const GroupSpec& spec = action.group();
    if (spec.folner.empty())
        throw std::invalid_argument("solve_coboundary: empty Folner schedule");

    CoboundaryResult out;
    out.v0 = LipschitzSample::zero(Y, action.beta(), action.active_dim());

    // residual of the coboundary equation: || b_g - v0 + pi_g v0 || per generator
    auto residual_of = [&](const LipschitzSample& v0) {
        double best = 0;
        for (std::size_t g = 0; g < spec.gens.size(); ++g) {
            Word w = Word::gen(static_cast<int>(g));
            LipschitzSample bg = b.value(w);
            MatrixXd vals = MatrixXd::Zero(Y.size(), action.active_dim());
            std::vector<int> covered;
            for (int i = 0; i < Y.size(); ++i) {
                auto pi = action.pi_apply(w, v0, i, false);
                if (!pi) continue;
                vals.row(i) = (bg.at(i) - v0.at(i) + *pi).transpose();
                covered.push_back(i);
            }
            best = std::max(best,
                            lip_norm_subset(LipschitzSample(Y, action.beta(), std::move(vals)),
                                            covered, threads));
        }
        return best;
    };

    int worse_stages = 0;
    for (const auto& stage : spec.folner) {
        if (stage.empty()) continue;
        MatrixXd acc = MatrixXd::Zero(Y.size(), action.active_dim());
        std::size_t bound_stride = std::max<std::size_t>(1, stage.size() / 200);
        for (std::size_t t = 0; t < stage.size(); ++t) {
            LipschitzSample bw = b.value(stage[t]);
            acc += bw.values;
            if (t % bound_stride == 0)
                out.orbit_bound = std::max(out.orbit_bound, lip_norm(bw, threads));
        }
        acc /= static_cast<double>(stage.size());
        LipschitzSample v0(Y, action.beta(), std::move(acc));
        double r = residual_of(v0);
        if (!out.residual_history.empty() && r >= out.residual_history.back()) ++worse_stages;
        out.residual_history.push_back(r);
        out.v0 = v0;
        out.residual = r;
        if (r <= tol) break;
    }
    out.certified = out.residual <= tol;
    if (!out.certified) {
        out.message =
            "not certified: residual " + std::to_string(out.residual) +
            " above tolerance after the schedule was exhausted (no claim that b is not a coboundary)";
        if (worse_stages >= 3) out.message += "; warning: residual non-decreasing over 3 stages";
    }
    return out;
}

}  // namespace qsim
