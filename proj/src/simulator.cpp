#include "mfgbroker/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace mfgb {

std::string to_string(Measure m) {
    switch (m) {
        case Measure::Broker: return "broker";
        case Measure::Trader: return "trader";
        case Measure::Reference: return "reference";
    }
    return "broker";
}

Measure measure_from_string(const std::string& s) {
    if (s == "broker") return Measure::Broker;
    if (s == "trader") return Measure::Trader;
    if (s == "reference") return Measure::Reference;
    throw std::invalid_argument("unknown measure: " + s);
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("MFG_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1 && v <= 1024) hw = static_cast<unsigned>(v);
    }
    return hw;
}

namespace {

// Exact-transition OU stepping constants for one signal.
struct OuStepper {
    double decay = 1.0;
    double sd = 0.0;  // stddev of the one-step transition noise
    double c1 = 0.0;  // innovation = c1 dW + c2 z2 when increments are kept
    double c2 = 0.0;

    OuStepper(double k, double sigma, double h) {
        decay = std::exp(-k * h);
        const double v = sigma * sigma * (1.0 - decay * decay) / (2.0 * k);
        sd = std::sqrt(v);
        const double gamma1 = sigma * (1.0 - decay) / k;  // Cov(innov, dW)
        c1 = gamma1 / h;
        c2 = std::sqrt(std::max(v - gamma1 * gamma1 / h, 0.0));
    }
};

}  // namespace

SimPath draw_signals(const ModelParams& p, const TraderType& tt,
                     const TimeGrid& grid, std::uint64_t seed,
                     std::uint64_t path, bool with_increments) {
    const std::size_t M = grid.steps();
    const double h = grid.dt();
    const double sqrt_h = std::sqrt(h);

    SimPath out;
    out.alpha.resize(M + 1);
    out.alpha_I.resize(M + 1);
    if (with_increments) {
        out.dW_alpha.resize(M);
        out.dW_I.resize(M);
        out.dW_S.resize(M);
    }

    const NormalStream sa(seed, kStreamAlpha, path);
    const NormalStream si(seed, kStreamPrivate, path);
    const NormalStream ss(seed, kStreamPrice, path);
    const OuStepper oa(p.k_alpha, p.sigma_alpha, h);
    const OuStepper oi(tt.k_I, tt.sigma_I, h);

    double a = p.alpha0, ai = 0.0;
    out.alpha[0] = a;
    out.alpha_I[0] = ai;
    for (std::size_t k = 0; k < M; ++k) {
        if (with_increments) {
            const double za1 = sa.normal(2 * k), za2 = sa.normal(2 * k + 1);
            const double zi1 = si.normal(2 * k), zi2 = si.normal(2 * k + 1);
            const double dWa = sqrt_h * za1;
            const double dWi = sqrt_h * zi1;
            a = a * oa.decay + oa.c1 * dWa + oa.c2 * za2;
            ai = ai * oi.decay + oi.c1 * dWi + oi.c2 * zi2;
            out.dW_alpha[k] = dWa;
            out.dW_I[k] = dWi;
            out.dW_S[k] = sqrt_h * ss.normal(k);
        } else {
            a = a * oa.decay + oa.sd * sa.normal(k);
            ai = ai * oi.decay + oi.sd * si.normal(k);
        }
        out.alpha[k + 1] = a;
        out.alpha_I[k + 1] = ai;
    }
    return out;
}

EquilibriumPath evolve_equilibrium(const MeanFieldCoefficients& mf,
                                   const TraderCoefficients& tc,
                                   const TimeGrid& grid, const SimPath& sig) {
    if (!(grid == mf.grid) || !(grid == tc.grid))
        throw std::invalid_argument("evolve_equilibrium: grid mismatch");
    const std::size_t M = grid.steps();
    const double h = grid.dt();

    EquilibriumPath out;
    for (auto* v : {&out.nu_bar, &out.nu_B, &out.nu_I, &out.Q_bar, &out.Q_barB,
                    &out.Q_I})
        v->resize(M + 1);

    double Qb = 0.0, QbB = 0.0, QI = 0.0;
    for (std::size_t k = 0; k <= M; ++k) {
        const double al = sig.alpha[k], aI = sig.alpha_I[k];
        const double nubar = mf.g_a.at(k) * al + mf.g_b.at(k) * Qb +
                             mf.g_c.at(k) * QbB;
        const double nuB = mf.h_a.at(k) * al + mf.h_b.at(k) * Qb +
                           mf.h_c.at(k) * QbB;
        const double nuI = tc.f_a.at(k) * al + tc.f_aI.at(k) * aI +
                           tc.f_b.at(k) * Qb + tc.f_bI.at(k) * QI +
                           tc.f_c.at(k) * QbB;
        out.nu_bar[k] = nubar;
        out.nu_B[k] = nuB;
        out.nu_I[k] = nuI;
        out.Q_bar[k] = Qb;
        out.Q_barB[k] = QbB;
        out.Q_I[k] = QI;
        if (k < M) {
            Qb += nubar * h;
            QbB += (nuB - nubar) * h;
            QI += nuI * h;
        }
    }
    return out;
}

namespace {

constexpr std::size_t kBlock = 64;  // paths per reduction block

struct BlockAccum {
    // Per recorded node, per column: sum and sum of squares.
    std::vector<double> sum, sumsq;       // size n_cols * n_recorded
    std::vector<double> nuI_sum, nuI_sq;  // size M+1
    std::size_t n = 0;

    BlockAccum(std::size_t n_cols, std::size_t n_rec, std::size_t nodes)
        : sum(n_cols * n_rec, 0.0),
          sumsq(n_cols * n_rec, 0.0),
          nuI_sum(nodes, 0.0),
          nuI_sq(nodes, 0.0) {}
};

const char* const kColumns[] = {"alpha", "alpha_I", "S",     "nu_bar",
                                "nu_B",  "nu_I",    "Q_bar", "Q_barB",
                                "Q_I",   "X_I",     "X_barB"};
constexpr std::size_t kNumCols = sizeof(kColumns) / sizeof(kColumns[0]);

}  // namespace

std::pair<PathEnsemble, EnsembleStats> simulate_equilibrium(
    const ModelParams& p, const MeanFieldCoefficients& mf,
    const TraderCoefficients& tc, const SimConfig& cfg) {
    const TimeGrid& grid = cfg.grid;
    if (!(grid == mf.grid) || !(grid == tc.grid))
        throw std::invalid_argument("simulate_equilibrium: grid mismatch");
    if (cfg.n_paths < 1)
        throw std::invalid_argument("simulate_equilibrium: n_paths >= 1");
    if (cfg.record_every == 0 || grid.steps() % cfg.record_every != 0)
        throw std::invalid_argument(
            "simulate_equilibrium: record_every must divide M");

    const std::size_t M = grid.steps();
    const double h = grid.dt();
    const std::size_t re = cfg.record_every;
    const std::size_t n_rec = M / re + 1;
    const std::size_t n_keep = std::min(cfg.n_full_paths, cfg.n_paths);
    const std::size_t n_blocks = (cfg.n_paths + kBlock - 1) / kBlock;

    PathEnsemble ensemble;
    ensemble.sample_paths.resize(n_keep);

    EnsembleStats stats;
    stats.n_paths = cfg.n_paths;
    stats.t.resize(n_rec);
    for (std::size_t r = 0; r < n_rec; ++r) stats.t[r] = grid.t(r * re);
    stats.HI_path.assign(cfg.n_paths, 0.0);
    stats.HB_path.assign(cfg.n_paths, 0.0);

    std::vector<BlockAccum> blocks(n_blocks,
                                   BlockAccum(kNumCols, n_rec, M + 1));

    auto run_path = [&](std::size_t path, BlockAccum& acc) {
        const SimPath sig =
            draw_signals(p, tc.trader_type, grid, cfg.seed, path, true);
        const EquilibriumPath eq = evolve_equilibrium(mf, tc, grid, sig);

        const bool keep = path < n_keep;
        PathRecord* rec = keep ? &ensemble.sample_paths[path] : nullptr;
        if (keep) {
            rec->path_id = path;
            rec->S.resize(M + 1);
            rec->X_I.resize(M + 1);
            rec->X_barB.resize(M + 1);
        }

        double S = p.S0, XI = 0.0, XbB = 0.0;
        double HI = 0.0, HB = 0.0;
        for (std::size_t k = 0; k <= M; ++k) {
            const double nuI = eq.nu_I[k];
            acc.nuI_sum[k] += nuI;
            acc.nuI_sq[k] += nuI * nuI;

            if (k % re == 0) {
                const std::size_t r = k / re;
                const double vals[kNumCols] = {
                    sig.alpha[k], sig.alpha_I[k], S,           eq.nu_bar[k],
                    eq.nu_B[k],   nuI,            eq.Q_bar[k], eq.Q_barB[k],
                    eq.Q_I[k],    XI,             XbB};
                for (std::size_t c = 0; c < kNumCols; ++c) {
                    acc.sum[c * n_rec + r] += vals[c];
                    acc.sumsq[c * n_rec + r] += vals[c] * vals[c];
                }
            }
            if (keep) {
                rec->S[k] = S;
                rec->X_I[k] = XI;
                rec->X_barB[k] = XbB;
            }
            if (k == M) break;

            // Objective integrands, left Riemann rule. The broker's
            // mean-field moment terms use the path's own trader draw for
            // int x^2 mu and the simulated nubar for int x mu.
            const double al = sig.alpha[k], aI = sig.alpha_I[k];
            const double QI = eq.Q_I[k], QbB = eq.Q_barB[k];
            const double nuB = eq.nu_B[k], nubar = eq.nu_bar[k];
            HI += (QI * (p.b * nuB + aI + al) - p.eta_I * nuI * nuI -
                   2.0 * tc.trader_type.a_I * QI * nuI -
                   tc.trader_type.phi_I * QI * QI) *
                  h;
            HB += (QbB * (p.b * nuB + al) + p.eta_I * nuI * nuI -
                   p.eta_B * nuB * nuB - 2.0 * p.a_B * QbB * (nuB - nubar) -
                   p.phi_B * QbB * QbB) *
                  h;

            // Price under the configured measure; cash by Euler.
            double drift = 0.0;
            if (cfg.measure == Measure::Broker) drift = p.b * nuB + al;
            if (cfg.measure == Measure::Trader) drift = p.b * nuB + aI + al;
            XI += -nuI * (S + p.eta_I * nuI) * h;
            XbB += (nubar * (S + p.eta_I * nubar) -
                    nuB * (S + p.eta_B * nuB)) *
                   h;
            S += drift * h + p.sigma_S * sig.dW_S[k];
        }
        stats.HI_path[path] = HI;
        stats.HB_path[path] = HB;
        if (keep) {
            rec->signals = sig;
            rec->states = eq;
        }
        acc.n += 1;
    };

    const unsigned workers =
        std::min<unsigned>(worker_count(), static_cast<unsigned>(n_blocks));
    auto run_block = [&](std::size_t b) {
        const std::size_t lo = b * kBlock;
        const std::size_t hi = std::min(lo + kBlock, cfg.n_paths);
        for (std::size_t path = lo; path < hi; ++path)
            run_path(path, blocks[b]);
    };
    if (workers <= 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t b = w; b < n_blocks; b += workers)
                    run_block(b);
            });
        for (auto& th : pool) th.join();
    }

    // Fixed-order reduction over blocks: the result does not depend on how
    // blocks were scheduled across threads.
    BlockAccum total(kNumCols, n_rec, M + 1);
    for (const BlockAccum& b : blocks) {
        for (std::size_t i = 0; i < total.sum.size(); ++i) {
            total.sum[i] += b.sum[i];
            total.sumsq[i] += b.sumsq[i];
        }
        for (std::size_t k = 0; k <= M; ++k) {
            total.nuI_sum[k] += b.nuI_sum[k];
            total.nuI_sq[k] += b.nuI_sq[k];
        }
        total.n += b.n;
    }

    const double n = static_cast<double>(cfg.n_paths);
    stats.nuI_mean.resize(M + 1);
    stats.nuI_sq_mean.resize(M + 1);
    for (std::size_t k = 0; k <= M; ++k) {
        stats.nuI_mean[k] = total.nuI_sum[k] / n;
        stats.nuI_sq_mean[k] = total.nuI_sq[k] / n;
    }
    for (std::size_t c = 0; c < kNumCols; ++c) {
        ColumnStats col;
        col.mean.resize(n_rec);
        col.sd.resize(n_rec);
        col.se.resize(n_rec);
        for (std::size_t r = 0; r < n_rec; ++r) {
            const double s = total.sum[c * n_rec + r];
            const double ss = total.sumsq[c * n_rec + r];
            const double mean = s / n;
            const double var =
                n > 1.0 ? std::max(ss - n * mean * mean, 0.0) / (n - 1.0)
                        : 0.0;
            col.mean[r] = mean;
            col.sd[r] = std::sqrt(var);
            col.se[r] = col.sd[r] / std::sqrt(n);
        }
        stats.columns.emplace(kColumns[c], std::move(col));
    }
    return {std::move(ensemble), std::move(stats)};
}

Objectives estimate_objectives(const EnsembleStats& stats,
                               const ModelParams& p, const TimeGrid& grid) {
    (void)p;
    if (stats.n_paths == 0 || stats.nuI_sq_mean.size() != grid.nodes())
        throw std::invalid_argument(
            "estimate_objectives: ensemble does not match grid");
    auto summarize = [&](const std::vector<double>& xs) {
        const double n = static_cast<double>(xs.size());
        double s = 0.0;
        for (double x : xs) s += x;
        const double mean = s / n;
        double ss = 0.0;
        for (double x : xs) ss += (x - mean) * (x - mean);
        const double sd = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        return ObjectiveEstimate{mean, sd / std::sqrt(n)};
    };
    return {summarize(stats.HI_path), summarize(stats.HB_path)};
}

ChaosReport simulate_finite_N(const ModelParams& p,
                              const MeanFieldCoefficients& mf,
                              TraderCoefficientCache& cache,
                              const SimConfig& cfg) {
    if (cfg.N < 1)
        throw std::invalid_argument("simulate_finite_N: N >= 1 required");
    const TimeGrid& grid = cfg.grid;
    if (!(grid == mf.grid))
        throw std::invalid_argument("simulate_finite_N: grid mismatch");
    const std::size_t M = grid.steps();
    const std::size_t N = cfg.N;
    const double h = grid.dt();

    // One market: a single common-signal path shared by all traders.
    const NormalStream sa(cfg.seed, kStreamAlpha, 0);
    const OuStepper oa(p.k_alpha, p.sigma_alpha, h);
    std::vector<double> alpha(M + 1);
    alpha[0] = p.alpha0;
    for (std::size_t k = 0; k < M; ++k)
        alpha[k + 1] = alpha[k] * oa.decay + oa.sd * sa.normal(k);

    // Theoretical mean-field path driven by the same common signal.
    std::vector<double> Qbar_th(M + 1), QbarB_th(M + 1), nubar_th(M + 1);
    {
        double Qb = 0.0, QbB = 0.0;
        for (std::size_t k = 0; k <= M; ++k) {
            const double nubar = mf.g_a.at(k) * alpha[k] +
                                 mf.g_b.at(k) * Qb + mf.g_c.at(k) * QbB;
            const double nuB = mf.h_a.at(k) * alpha[k] + mf.h_b.at(k) * Qb +
                               mf.h_c.at(k) * QbB;
            Qbar_th[k] = Qb;
            QbarB_th[k] = QbB;
            nubar_th[k] = nubar;
            if (k < M) {
                Qb += nubar * h;
                QbB += (nuB - nubar) * h;
            }
        }
    }

    // Population state.
    struct Trader {
        const TraderCoefficients* tc;
        double alpha_I = 0.0, Q = 0.0;
        OuStepper ou{1.0, 0.0, 1.0};
        NormalStream rng{0, 0, 0};
    };
    std::vector<Trader> traders(N);
    for (std::size_t n = 0; n < N; ++n) {
        const TraderType tt = cfg.type_dist.sample(cfg.seed, n);
        traders[n].tc = &cache.get(tt);
        traders[n].ou = OuStepper(tt.k_I, tt.sigma_I, h);
        traders[n].rng = NormalStream(cfg.seed, kStreamFiniteN, n);
    }

    double Qbar_emp = 0.0, QbarB_emp = 0.0;
    double sup_gap = 0.0, sum_sq = 0.0;
    for (std::size_t k = 0; k <= M; ++k) {
        const double Qb_obs = cfg.empirical_feedback ? Qbar_emp : Qbar_th[k];
        const double QbB_obs =
            cfg.empirical_feedback ? QbarB_emp : QbarB_th[k];
        double mean_speed = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            Trader& tr = traders[n];
            const TraderCoefficients& tc = *tr.tc;
            const double nu = tc.f_a.at(k) * alpha[k] +
                              tc.f_aI.at(k) * tr.alpha_I +
                              tc.f_b.at(k) * Qb_obs + tc.f_bI.at(k) * tr.Q +
                              tc.f_c.at(k) * QbB_obs;
            mean_speed += nu;
            if (k < M) {
                tr.Q += nu * h;
                tr.alpha_I = tr.alpha_I * tr.ou.decay +
                             tr.ou.sd * tr.rng.normal(k);
            }
        }
        mean_speed /= static_cast<double>(N);
        const double gap = std::abs(mean_speed - nubar_th[k]);
        sup_gap = std::max(sup_gap, gap);
        sum_sq += gap * gap;
        if (cfg.empirical_feedback && k < M) {
            const double nuB = mf.h_a.at(k) * alpha[k] +
                               mf.h_b.at(k) * Qb_obs + mf.h_c.at(k) * QbB_obs;
            Qbar_emp += mean_speed * h;
            QbarB_emp += (nuB - mean_speed) * h;
        }
    }
    ChaosReport rep;
    rep.N = N;
    rep.sup_gap = sup_gap;
    rep.rms_gap = std::sqrt(sum_sq / static_cast<double>(M + 1));
    return rep;
}

}  // namespace mfgb
