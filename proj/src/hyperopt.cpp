#include "esnode/hyperopt.hpp"
#include "esnode/gaussian_process.hpp"
#include "esnode/parallel.hpp"
#include "esnode/rng.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace esnode {

void SearchSpace::validate() const {
    require(!dims.empty(), ErrorKind::Config, "search space has no dimensions");
    for (const auto& d : dims) {
        require(d.lower < d.upper, ErrorKind::Config, "search dimension '" + d.name + "' needs lower < upper");
        if (d.scale == Scale::Log10)
            require(d.lower > 0.0, ErrorKind::Config, "log-scaled dimension '" + d.name + "' must be positive");
    }
}

std::vector<double> SearchSpace::to_values(const Vector& unit) const {
    require(unit.size() == size(), ErrorKind::DimensionMismatch, "point dimension mismatch");
    std::vector<double> out(dims.size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const Dimension& d = dims[i];
        const double u = std::clamp(unit(static_cast<Index>(i)), 0.0, 1.0);
        double v = d.scale == Scale::Log10
                       ? std::pow(10.0, std::log10(d.lower) + u * (std::log10(d.upper) - std::log10(d.lower)))
                       : d.lower + u * (d.upper - d.lower);
        if (d.integer) v = std::round(v);
        out[i] = std::clamp(v, d.lower, d.upper);
    }
    return out;
}

Vector SearchSpace::to_unit(const std::vector<double>& values) const {
    require(values.size() == dims.size(), ErrorKind::DimensionMismatch, "point dimension mismatch");
    Vector u(size());
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const Dimension& d = dims[i];
        const double x = d.scale == Scale::Log10
                             ? (std::log10(values[i]) - std::log10(d.lower)) /
                                   (std::log10(d.upper) - std::log10(d.lower))
                             : (values[i] - d.lower) / (d.upper - d.lower);
        u(static_cast<Index>(i)) = std::clamp(x, 0.0, 1.0);
    }
    return u;
}

void BOConfig::validate() const {
    require(max_evals >= 1, ErrorKind::Config, "max_evals must be >= 1");
    require(n_init >= 1, ErrorKind::Config, "n_init must be >= 1");
    require(max_evals >= n_init, ErrorKind::Config, "max_evals must be >= n_init");
    require(batch_size >= 1, ErrorKind::Config, "batch_size must be >= 1");
    require(val_split > 0.0 && val_split < 1.0, ErrorKind::Config, "val_split must lie in (0, 1)");
    require(beta >= 0.0 && beta <= 1.0, ErrorKind::Config, "beta must lie in [0, 1]");
    require(cv_samples >= 1, ErrorKind::Config, "cv_samples must be >= 1");
    require(subsequence_length >= 0, ErrorKind::Config, "subsequence_length must be >= 0");
    require(success_tol >= 1 && failure_tol >= 0, ErrorKind::Config, "trust-region tolerances invalid");
    require(min_side > 0.0 && min_side < max_side && init_side >= min_side && init_side <= max_side,
            ErrorKind::Config, "trust-region side bounds invalid");
}

void TrustRegion::update(bool improved) {
    if (improved) {
        ++success_count;
        failure_count = 0;
    } else {
        ++failure_count;
        success_count = 0;
    }
    if (success_count >= success_tol) {
        side_length = std::min(2.0 * side_length, max_side);
        success_count = 0;
    }
    if (failure_count >= failure_tol) {
        side_length *= 0.5;
        failure_count = 0;
    }
}

void TrustRegion::bounds(const Vector& lengthscales, Vector& lo, Vector& hi) const {
    Vector w = lengthscales / lengthscales.mean();
    const double geo = std::exp(w.array().log().mean());
    w /= geo;
    lo = (center - 0.5 * side_length * w).cwiseMax(0.0);
    hi = (center + 0.5 * side_length * w).cwiseMin(1.0);
}

Matrix sobol_points(Index count, Index dim, std::uint64_t seed) {
    require(dim >= 1, ErrorKind::InvalidArgument, "sobol dimension must be >= 1");
    boost::random::sobol eng(static_cast<std::size_t>(dim));
    Rng rng(seed);
    std::vector<std::uint64_t> shift(static_cast<std::size_t>(dim));
    for (auto& s : shift) s = rng.next();
    Matrix out(count, dim);
    // Boost starts at sequence index 1; index 0 (the origin) completes the
    // first 2^m points to a balanced net.
    for (Index i = 0; i < count; ++i)
        for (Index j = 0; j < dim; ++j) {
            const std::uint64_t raw = i == 0 ? 0 : static_cast<std::uint64_t>(eng());
            const std::uint64_t v = raw ^ shift[static_cast<std::size_t>(j)];
            out(i, j) = static_cast<double>(v >> 11) * 0x1.0p-53;
        }
    return out;
}

BOResult optimize(const SearchSpace& space, const Objective& objective, const BOConfig& cfg) {
    space.validate();
    cfg.validate();
    const Index d = space.size();
    Rng rng(cfg.seed);

    TrustRegion tr;
    tr.side_length = cfg.init_side;
    tr.success_tol = cfg.success_tol;
    tr.failure_tol = cfg.failure_tol > 0
                         ? cfg.failure_tol
                         : static_cast<int>((d + cfg.batch_size - 1) / cfg.batch_size);
    tr.min_side = cfg.min_side;
    tr.max_side = cfg.max_side;

    BOResult out;
    std::vector<Vector> xs;
    std::vector<double> ys;

    auto run_batch = [&](const Matrix& units, bool fallback) {
        const std::size_t n = static_cast<std::size_t>(units.rows());
        std::vector<std::vector<double>> values(n);
        std::vector<double> obj(n);
        for (std::size_t i = 0; i < n; ++i) values[i] = space.to_values(units.row(static_cast<Index>(i)).transpose());
        parallel_for(n, cfg.threads, [&](std::size_t i) {
            double v;
            try {
                v = objective(values[i]);
            } catch (const std::exception&) {
                v = kObjectiveSentinel;
            }
            obj[i] = std::isfinite(v) ? v : kObjectiveSentinel;
        });
        for (std::size_t i = 0; i < n; ++i) {
            Evaluation e;
            e.index = static_cast<Index>(out.history.size());
            e.unit = units.row(static_cast<Index>(i)).transpose();
            e.values = values[i];
            e.objective = obj[i];
            e.side_length = tr.side_length;
            e.surrogate_fallback = fallback;
            if (obj[i] < out.best_objective) {
                out.best_objective = obj[i];
                out.best_index = e.index;
                out.best_values = values[i];
            }
            e.best_so_far = out.best_objective;
            xs.push_back(e.unit);
            ys.push_back(obj[i]);
            out.history.push_back(std::move(e));
        }
        return *std::min_element(obj.begin(), obj.end());
    };

    run_batch(sobol_points(cfg.n_init, d, rng.next()), false);

    const Index n_cand = cfg.n_candidates > 0 ? cfg.n_candidates : std::min<Index>(100 * d, 1000);
    const double perturb = std::min(20.0 / static_cast<double>(d), 1.0);

    while (static_cast<Index>(out.history.size()) < cfg.max_evals) {
        if (tr.exhausted()) {
            out.terminated_by_side = true;
            break;
        }
        const Index n = static_cast<Index>(xs.size());
        Matrix x(n, d);
        Vector y(n);
        for (Index i = 0; i < n; ++i) {
            x.row(i) = xs[static_cast<std::size_t>(i)].transpose();
            y(i) = ys[static_cast<std::size_t>(i)];
        }
        // Failed evaluations stay visible to the surrogate as the worst value
        // seen, instead of a sentinel that would swamp the standardization.
        double lo_y = INFINITY, hi_y = -INFINITY;
        for (Index i = 0; i < n; ++i)
            if (y(i) < kObjectiveSentinel) {
                lo_y = std::min(lo_y, y(i));
                hi_y = std::max(hi_y, y(i));
            }
        if (std::isfinite(lo_y)) {
            const double cap = hi_y + std::max(hi_y - lo_y, 1.0);
            y = y.cwiseMin(cap);
        }
        const double mu = y.mean();
        double sd = std::sqrt((y.array() - mu).square().mean());
        if (!(sd > 1e-12)) sd = 1.0;
        const Vector ys_std = (y.array() - mu) / sd;

        tr.center = xs[static_cast<std::size_t>(out.best_index)];
        const auto gp = GaussianProcess::fit(x, ys_std, rng, cfg.gp_restarts, cfg.gp_iterations);
        const Vector ls = gp ? gp->lengthscales() : Vector::Ones(d);
        Vector lo, hi;
        tr.bounds(ls, lo, hi);

        const Index bsz = std::min(cfg.batch_size, cfg.max_evals - static_cast<Index>(out.history.size()));
        Matrix cand = sobol_points(n_cand, d, rng.next());
        for (Index i = 0; i < n_cand; ++i) {
            bool any = false;
            for (Index j = 0; j < d; ++j) {
                const bool move = perturb >= 1.0 || rng.uniform() < perturb;
                any = any || move;
                cand(i, j) = move ? lo(j) + (hi(j) - lo(j)) * cand(i, j) : tr.center(j);
            }
            if (!any) {
                const Index j = static_cast<Index>(rng.uniform() * static_cast<double>(d));
                cand(i, j) = lo(j) + (hi(j) - lo(j)) * rng.uniform();
            }
        }

        Matrix batch(bsz, d);
        bool fallback = !gp;
        std::optional<Matrix> draws;
        if (gp) draws = gp->sample(cand, static_cast<int>(bsz), rng);
        if (!draws) fallback = true;
        if (fallback) {
            ++out.degenerate_iterations;
            for (Index b = 0; b < bsz; ++b)
                for (Index j = 0; j < d; ++j) batch(b, j) = lo(j) + (hi(j) - lo(j)) * rng.uniform();
        } else {
            std::vector<bool> taken(static_cast<std::size_t>(n_cand), false);
            for (Index b = 0; b < bsz; ++b) {
                Index arg = -1;
                double best = INFINITY;
                for (Index i = 0; i < n_cand; ++i)
                    if (!taken[static_cast<std::size_t>(i)] && (*draws)(i, b) < best) {
                        best = (*draws)(i, b);
                        arg = i;
                    }
                if (arg < 0) arg = b % n_cand;
                taken[static_cast<std::size_t>(arg)] = true;
                batch.row(b) = cand.row(arg);
            }
        }

        const double before = out.best_objective;
        const double batch_best = run_batch(batch, fallback);
        tr.update(batch_best < before - 1e-3 * std::abs(before));
    }
    return out;
}

double cv_objective(const std::vector<CvLosses>& losses, double beta) {
    if (losses.empty()) return kObjectiveSentinel;
    double acc = 0.0;
    for (const auto& l : losses) {
        if (!(l.train > 0.0) || !(l.val > 0.0) || !std::isfinite(l.train) || !std::isfinite(l.val))
            return kObjectiveSentinel;
        acc += beta * std::log(l.train) + (1.0 - beta) * std::log(l.val);
    }
    const double v = acc / static_cast<double>(losses.size());
    return std::isfinite(v) ? v : kObjectiveSentinel;
}

TrialBasis slice_rows(const TrialBasis& basis, Index start, Index count) {
    require(start >= 0 && count >= 1 && start + count <= basis.size(), ErrorKind::InvalidArgument,
            "basis slice out of range");
    TrialBasis b;
    b.times = basis.times.segment(start, count);
    b.s_mat = basis.s_mat.middleRows(start, count);
    b.s_dot = basis.s_dot.middleRows(start, count);
    b.g_vals = basis.g_vals.segment(start, count);
    b.g_dot_vals = basis.g_dot_vals.segment(start, count);
    return b;
}

namespace {

TrialBasis subsequence_basis(const Reservoir& res, double t_sub, Index n) {
    const double dt = res.hyper().dt;
    TrialBasis b = build_basis(res.propagate(t_sub, t_sub + static_cast<double>(n - 1) * dt));
    require(b.size() >= n, ErrorKind::InvalidArgument, "sub-sequence grid shorter than requested");
    return b.size() == n ? b : slice_rows(b, 0, n);
}

double mean_square(const Matrix& r) { return r.squaredNorm() / static_cast<double>(r.size()); }

std::vector<Vector> scalar_ics(const std::vector<double>& psi0) {
    std::vector<Vector> out;
    for (double p : psi0) out.push_back(Vector::Constant(1, p));
    return out;
}

}  // namespace

std::vector<Vector> LinearTarget::default_ics() const { return scalar_ics(ode_.psi0_list); }

std::vector<CvLosses> LinearTarget::cv_losses(const Reservoir& res, const GDConfig&, double t_sub,
                                              Index n_train, Index n_val,
                                              const std::vector<Vector>& ics) const {
    const Index n = n_train + n_val;
    const TrialBasis basis = subsequence_basis(res, t_sub, n);
    const Vector a1 = sample_nonzero(ode_.a1, basis.times, "a1(t)");
    const Vector a0 = sample(ode_.a0, basis.times);
    const Vector f = sample(ode_.force, basis.times);
    Matrix d_h = a1.asDiagonal() * basis.s_dot;
    d_h.noalias() += a0.asDiagonal() * basis.s_mat;
    const RidgeFactorization fac(d_h.topRows(n_train), res.hyper().regularization);
    std::vector<CvLosses> out;
    for (const Vector& ic : ics) {
        const Vector d0 = a0 * ic(0) - f;
        const Vector w = -fac.solve(d_h.topRows(n_train).transpose() * d0.head(n_train));
        const Vector r = d_h * w + d0;
        out.push_back({mean_square(r.head(n_train)), mean_square(r.tail(n_val))});
    }
    return out;
}

std::vector<Vector> BernoulliTarget::default_ics() const { return scalar_ics(ode_.psi0_list); }

std::vector<CvLosses> BernoulliTarget::cv_losses(const Reservoir& res, const GDConfig& gd, double t_sub,
                                                 Index n_train, Index n_val,
                                                 const std::vector<Vector>& ics) const {
    const Index n = n_train + n_val;
    const TrialBasis basis = subsequence_basis(res, t_sub, n);
    const TrialBasis train_b = slice_rows(basis, 0, n_train);
    const TrialBasis val_b = slice_rows(basis, n_train, n_val);
    std::vector<CvLosses> out;
    for (std::size_t i = 0; i < ics.size(); ++i) {
        const double psi0 = ics[i](0);
        const BernoulliProblem train_p(ode_, train_b.times, psi0);
        const BernoulliProblem val_p(ode_, val_b.times, psi0);
        ReadoutWeights w = init_ == BernoulliInit::Random
                               ? random_weights(1, basis.features(), gd.seed + i)
                               : linearized_weights(ode_, train_b, psi0, res.hyper().regularization);
        if (init_ != BernoulliInit::Linearized) w = train(train_p, train_b, w, gd).w_best;
        out.push_back({mean_square(residuals_at(train_p, train_b, w)),
                       mean_square(residuals_at(val_p, val_b, w))});
    }
    return out;
}

std::vector<CvLosses> SystemTarget::cv_losses(const Reservoir& res, const GDConfig& gd, double t_sub,
                                              Index n_train, Index n_val,
                                              const std::vector<Vector>& ics) const {
    const Index n = n_train + n_val;
    const TrialBasis basis = subsequence_basis(res, t_sub, n);
    const TrialBasis train_b = slice_rows(basis, 0, n_train);
    const TrialBasis val_b = slice_rows(basis, n_train, n_val);
    std::vector<CvLosses> out;
    for (const Vector& ic : ics) {
        SystemSpec spec = spec_;
        spec.ic = ic;
        const SystemProblem problem(spec);
        const ReadoutWeights w0 = random_weights(problem.outputs(), basis.features(), gd.seed);
        const ReadoutWeights w = train(problem, train_b, w0, gd).w_best;
        out.push_back({mean_square(residuals_at(problem, train_b, w)),
                       mean_square(residuals_at(problem, val_b, w))});
    }
    return out;
}

void apply_point(const SearchSpace& space, const std::vector<double>& values, HyperParams& hp, GDConfig& gd) {
    require(values.size() == space.dims.size(), ErrorKind::DimensionMismatch, "point dimension mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::string& name = space.dims[i].name;
        const double v = values[i];
        if (name == "dt") hp.dt = v;
        else if (name == "n_nodes") hp.n_nodes = static_cast<Index>(std::llround(v));
        else if (name == "connectivity") hp.connectivity = std::min(v, 1.0);
        else if (name == "spectral_radius") hp.spectral_radius = v;
        else if (name == "regularization") hp.regularization = v;
        else if (name == "leaking_rate") hp.leaking_rate = std::min(v, 1.0);
        else if (name == "bias") hp.bias = v;
        else if (name == "enet_alpha") gd.enet_alpha = v;
        else if (name == "enet_strength") gd.enet_strength = v;
        else if (name == "spike_threshold" || name == "spikethreshold") gd.spike_threshold = v;
        else if (name == "gamma") gd.gamma = v;
        else if (name == "gamma_cyclic") gd.gamma_cyclic = v;
        else if (name == "learning_rate") gd.learning_rate = v;
        else raise(ErrorKind::Config, "unknown search dimension '" + name + "'");
    }
}

double bo_objective(const HyperParams& hp, const GDConfig& gd, const TuningTarget& target,
                    const BOConfig& cfg) {
    try {
        hp.validate();
        const double t0 = target.t_start();
        const Index total = grid_size(t0, target.t_end(), hp.dt);
        Index sub = cfg.subsequence_length > 0
                        ? std::min(cfg.subsequence_length, total)
                        : static_cast<Index>(std::llround(2.0 * static_cast<double>(total) / 3.0));
        const Index n_val = std::max<Index>(1, std::llround(cfg.val_split * static_cast<double>(sub)));
        const Index n_train = sub - n_val;
        if (n_train < 3) return kObjectiveSentinel;
        const std::vector<Vector> ics = cfg.ic_bundle.empty() ? target.default_ics() : cfg.ic_bundle;
        if (ics.empty()) return kObjectiveSentinel;

        const Reservoir res = build_reservoir_resampling(hp);
        Rng rng(cfg.seed);
        std::vector<CvLosses> all;
        for (Index c = 0; c < cfg.cv_samples; ++c) {
            const double u = rng.uniform();
            const Index start = static_cast<Index>(u * static_cast<double>(total - sub + 1));
            const double t_sub = t0 + static_cast<double>(start) * hp.dt;
            const auto part = target.cv_losses(res, gd, t_sub, n_train, n_val, ics);
            all.insert(all.end(), part.begin(), part.end());
        }
        return cv_objective(all, cfg.beta);
    } catch (const std::exception&) {
        return kObjectiveSentinel;
    }
}

TuningResult optimize_hyperparameters(const SearchSpace& space, const TuningTarget& target,
                                      const HyperParams& base_hp, const GDConfig& base_gd,
                                      const BOConfig& cfg) {
    space.validate();
    // Reject unknown names before spending any budget.
    {
        HyperParams hp = base_hp;
        GDConfig gd = base_gd;
        apply_point(space, space.to_values(Vector::Constant(space.size(), 0.5)), hp, gd);
    }
    BOConfig inner = cfg;
    auto objective = [&](const std::vector<double>& values) {
        HyperParams hp = base_hp;
        GDConfig gd = base_gd;
        apply_point(space, values, hp, gd);
        BOConfig one = inner;
        one.threads = 1;
        return bo_objective(hp, gd, target, one);
    };
    TuningResult out;
    out.bo = optimize(space, objective, cfg);
    out.hyper = base_hp;
    out.gd = base_gd;
    apply_point(space, out.bo.best_values, out.hyper, out.gd);
    return out;
}

}  // namespace esnode
