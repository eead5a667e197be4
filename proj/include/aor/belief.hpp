#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aor/math.hpp"

namespace aor {

/// Floor applied to belief entries before taking logs. Confident softmax
/// outputs can carry exact zeros in other components.
inline constexpr double kBeliefFloor = 1e-8;

/// Floor for accumulated log-posterior entries; keeps the state finite no
/// matter how many observations were fused.
inline constexpr double kLogPosteriorFloor = -700.0;

/// Per-image posterior over the C object classes. Entries are non-negative
/// and sum to one.
class BeliefVector {
public:
    explicit BeliefVector(Eigen::VectorXd probs) : probs_(std::move(probs)) {
        if (probs_.size() == 0) {
            throw std::invalid_argument("BeliefVector: empty probability vector");
        }
        if ((probs_.array() < 0.0).any()) {
            throw std::invalid_argument("BeliefVector: negative entry");
        }
        if (std::abs(probs_.sum() - 1.0) > 1e-9) {
            throw std::invalid_argument("BeliefVector: entries must sum to 1");
        }
    }

    static BeliefVector uniform(int num_classes) {
        return BeliefVector(Eigen::VectorXd::Constant(num_classes, 1.0 / num_classes));
    }

    /// Normalizes an arbitrary non-negative vector onto the simplex.
    static BeliefVector normalized(const Eigen::VectorXd& weights) {
        const double s = weights.sum();
        if (!(s > 0.0)) {
            throw std::invalid_argument("BeliefVector: non-positive total mass");
        }
        return BeliefVector(weights / s);
    }

    const Eigen::VectorXd& probs() const { return probs_; }
    int size() const { return static_cast<int>(probs_.size()); }
    double operator[](int i) const { return probs_(i); }
    int argmax() const { return argmax_lowest(probs_); }

private:
    Eigen::VectorXd probs_;
};

enum class EncoderKind { NaiveBayes, Dirichlet };

/// One Dirichlet parameter vector per (object, action) pair. All components
/// stay strictly positive; fitting happens in log-parameter space.
class DirichletTable {
public:
    DirichletTable(int num_classes, int num_actions)
        : num_classes_(num_classes), num_actions_(num_actions) {
        if (num_classes <= 0 || num_actions <= 0) {
            throw std::invalid_argument("DirichletTable: dimensions must be positive");
        }
        // Uniform Dirichlet everywhere: the fresh state carries no information.
        alphas_.assign(static_cast<std::size_t>(num_classes) * num_actions,
                       Eigen::VectorXd::Ones(num_classes));
    }

    int num_classes() const { return num_classes_; }
    int num_actions() const { return num_actions_; }

    const Eigen::VectorXd& alpha(int object, int action) const {
        return alphas_[index(object, action)];
    }

    void set_alpha(int object, int action, Eigen::VectorXd value) {
        if (value.size() != num_classes_) {
            throw std::invalid_argument("DirichletTable: alpha has wrong dimension");
        }
        if (!(value.array() > 0.0).all()) {
            throw std::invalid_argument("DirichletTable: alpha must be strictly positive");
        }
        alphas_[index(object, action)] = std::move(value);
    }

    bool operator==(const DirichletTable& other) const {
        if (num_classes_ != other.num_classes_ || num_actions_ != other.num_actions_) {
            return false;
        }
        for (std::size_t i = 0; i < alphas_.size(); ++i) {
            if (alphas_[i] != other.alphas_[i]) {
                return false;
            }
        }
        return true;
    }

private:
    std::size_t index(int object, int action) const {
        if (object < 0 || object >= num_classes_) {
            throw std::out_of_range("DirichletTable: object id out of range");
        }
        if (action < 0 || action >= num_actions_) {
            throw std::out_of_range("DirichletTable: action id out of range");
        }
        return static_cast<std::size_t>(object) * num_actions_ + action;
    }

    int num_classes_ = 0;
    int num_actions_ = 0;
    std::vector<Eigen::VectorXd> alphas_;
};

/// Accumulated per-(object, action) log-posterior plus the latest
/// observation block. Both encoders share the layout so the action head
/// sees a fixed input width.
struct EncodedState {
    EncoderKind kind = EncoderKind::NaiveBayes;
    /// C x H. Column a holds the log posterior over objects given the
    /// beliefs observed under action a (Naive Bayes uses column 0 only).
    Eigen::MatrixXd log_posterior;
    /// Latest feature (or belief) block, maintained by the episode runner.
    Eigen::VectorXd latest_block;
    /// Actions whose column has received at least one observation.
    std::vector<bool> fused_actions;
    int fuse_count = 0;

    static EncodedState fresh(EncoderKind kind, int num_classes, int num_actions) {
        EncodedState s;
        s.kind = kind;
        // log(1/C) everywhere: every column is a normalized uniform posterior.
        s.log_posterior = Eigen::MatrixXd::Constant(
            num_classes, num_actions, -std::log(static_cast<double>(num_classes)));
        s.latest_block = Eigen::VectorXd();
        s.fused_actions.assign(static_cast<std::size_t>(num_actions), false);
        s.fuse_count = 0;
        return s;
    }

    int num_classes() const { return static_cast<int>(log_posterior.rows()); }
    int num_actions() const { return static_cast<int>(log_posterior.cols()); }
};

namespace detail {

inline Eigen::VectorXd floored_log(const Eigen::VectorXd& probs) {
    return probs.array().max(kBeliefFloor).log().matrix();
}

/// Shift a log-posterior column so it exponentiates to a distribution.
inline void renormalize_column(Eigen::MatrixXd& log_posterior, int column) {
    Eigen::VectorXd col = log_posterior.col(column);
    col.array() -= log_sum_exp(col);
    log_posterior.col(column) = col.array().max(kLogPosteriorFloor).matrix();
}

}  // namespace detail

/// log Dir(b; alpha) with belief entries floored at kBeliefFloor.
inline double dirichlet_log_density(const BeliefVector& b, const Eigen::VectorXd& alpha) {
    if (alpha.size() != b.size()) {
        throw std::invalid_argument("dirichlet_log_density: dimension mismatch");
    }
    if (!(alpha.array() > 0.0).all()) {
        throw std::invalid_argument("dirichlet_log_density: alpha must be strictly positive");
    }
    double value = std::lgamma(alpha.sum());
    for (int j = 0; j < alpha.size(); ++j) {
        value -= std::lgamma(alpha(j));
    }
    value += ((alpha.array() - 1.0) * detail::floored_log(b.probs()).array()).sum();
    return value;
}

/// Gradient of sum_i log Dir(b_i; alpha) with respect to alpha:
///   N Psi(sum_j alpha_j) - N Psi(alpha_k) + sum_i log [b_i]_k.
inline Eigen::VectorXd dirichlet_grad_loglik(const std::vector<BeliefVector>& samples,
                                             const Eigen::VectorXd& alpha) {
    if (samples.empty()) {
        throw std::invalid_argument("dirichlet_grad_loglik: empty sample list");
    }
    if (!(alpha.array() > 0.0).all()) {
        throw std::invalid_argument("dirichlet_grad_loglik: alpha must be strictly positive");
    }
    const auto n = static_cast<double>(samples.size());
    const double psi_total = digamma(alpha.sum());
    Eigen::VectorXd grad(alpha.size());
    for (int k = 0; k < alpha.size(); ++k) {
        grad(k) = n * (psi_total - digamma(alpha(k)));
    }
    for (const BeliefVector& b : samples) {
        if (b.size() != alpha.size()) {
            throw std::invalid_argument("dirichlet_grad_loglik: sample dimension mismatch");
        }
        grad += detail::floored_log(b.probs());
    }
    return grad;
}

/// One gradient-ascent step on the batch log-likelihood of the (object,
/// action) cell. The step is taken in theta = log(alpha), which keeps every
/// component positive without projection.
inline void fit_step_in_place(DirichletTable& table, int object, int action,
                              const std::vector<BeliefVector>& batch, double lr) {
    if (batch.empty()) {
        throw std::invalid_argument("fit_step: empty batch");
    }
    if (lr < 0.0) {
        throw std::invalid_argument("fit_step: negative learning rate");
    }
    const Eigen::VectorXd& alpha = table.alpha(object, action);
    if (lr == 0.0) {
        return;
    }
    const Eigen::VectorXd grad = dirichlet_grad_loglik(batch, alpha);
    // d/dtheta = alpha * d/dalpha
    const Eigen::VectorXd theta =
        alpha.array().log() + lr * (alpha.array() * grad.array());
    table.set_alpha(object, action, theta.array().exp().matrix());
}

inline DirichletTable fit_step(DirichletTable table, int object, int action,
                               const std::vector<BeliefVector>& batch, double lr) {
    fit_step_in_place(table, object, action, batch, lr);
    return table;
}

/// Naive Bayes fusion: the running product of belief vectors, renormalized.
/// Accumulation is additive in log space in column 0.
inline EncodedState nb_fuse(EncodedState state, const BeliefVector& b) {
    if (state.kind != EncoderKind::NaiveBayes) {
        throw std::logic_error("nb_fuse: state is not a Naive Bayes state");
    }
    if (b.size() != state.num_classes()) {
        throw std::invalid_argument("nb_fuse: belief dimension mismatch");
    }
    state.log_posterior.col(0) += detail::floored_log(b.probs());
    detail::renormalize_column(state.log_posterior, 0);
    state.fuse_count += 1;
    return state;
}

/// Dirichlet fusion: adds log Dir(b; alpha^o_a) to column a for every
/// object o, then renormalizes that column. Columns of other actions are
/// left untouched.
inline EncodedState dirichlet_fuse(EncodedState state, const BeliefVector& b,
                                   int action_taken, const DirichletTable& table) {
    if (state.kind != EncoderKind::Dirichlet) {
        throw std::logic_error("dirichlet_fuse: state is not a Dirichlet state");
    }
    if (action_taken < 0 || action_taken >= state.num_actions()) {
        throw std::out_of_range("dirichlet_fuse: action id out of range");
    }
    if (table.num_classes() != state.num_classes() ||
        table.num_actions() != state.num_actions()) {
        throw std::invalid_argument("dirichlet_fuse: table dimensions mismatch");
    }
    for (int o = 0; o < state.num_classes(); ++o) {
        state.log_posterior(o, action_taken) +=
            dirichlet_log_density(b, table.alpha(o, action_taken));
    }
    detail::renormalize_column(state.log_posterior, action_taken);
    state.fused_actions[static_cast<std::size_t>(action_taken)] = true;
    state.fuse_count += 1;
    return state;
}

/// Flattens the state into the vector presented to the action head:
/// the exponentiated, per-column normalized posterior block (action-major,
/// length C*H) followed by the latest feature block. For the Naive Bayes
/// encoder the fused belief is tiled across all H column slots so both
/// encoders produce the same width.
inline Eigen::VectorXd encode(const EncodedState& state,
                              const Eigen::VectorXd& latest_features) {
    const int c = state.num_classes();
    const int h = state.num_actions();
    Eigen::VectorXd out(static_cast<Eigen::Index>(c) * h + latest_features.size());
    if (state.kind == EncoderKind::NaiveBayes) {
        Eigen::VectorXd p = state.log_posterior.col(0).array().exp();
        p /= p.sum();
        for (int a = 0; a < h; ++a) {
            out.segment(static_cast<Eigen::Index>(a) * c, c) = p;
        }
    } else {
        for (int a = 0; a < h; ++a) {
            Eigen::VectorXd p = state.log_posterior.col(a).array().exp();
            p /= p.sum();
            out.segment(static_cast<Eigen::Index>(a) * c, c) = p;
        }
    }
    out.tail(latest_features.size()) = latest_features;
    return out;
}

/// The label distribution read out of a fused state.
///
/// Naive Bayes reads the fused product directly. The Dirichlet state is
/// collapsed by averaging the posterior columns of the actions observed so
/// far; before any action has been fused (including the very first image of
/// a sequence, which no action produced) the latest single-image belief is
/// the only evidence available and is returned as-is.
inline BeliefVector label_readout(const EncodedState& state,
                                  const BeliefVector& latest_belief) {
    if (state.kind == EncoderKind::NaiveBayes) {
        if (state.fuse_count == 0) {
            return latest_belief;
        }
        return BeliefVector::normalized(
            state.log_posterior.col(0).array().exp().matrix());
    }
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(state.num_classes());
    int used = 0;
    for (int a = 0; a < state.num_actions(); ++a) {
        if (!state.fused_actions[static_cast<std::size_t>(a)]) {
            continue;
        }
        Eigen::VectorXd p = state.log_posterior.col(a).array().exp();
        acc += p / p.sum();
        ++used;
    }
    if (used == 0) {
        return latest_belief;
    }
    return BeliefVector::normalized(acc);
}

}  // namespace aor
