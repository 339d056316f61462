#include "crown/quad.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace crown::quad {

namespace {

constexpr double pi = std::numbers::pi;

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed ^ mix64(stream + 1))) {}

std::uint64_t CounterRng::next_u64() { return mix64(key_ ^ mix64(ctr_++)); }

double CounterRng::uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

double CounterRng::uniform_pos() {
    double u;
    do { u = uniform(); } while (u == 0.0);
    return u;
}

double CounterRng::normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
}

double CounterRng::gamma(double shape) {
    if (shape < 1.0) {
        // boost by one and correct with a uniform power
        double u = uniform_pos();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = normal();
        double v = 1.0 + c * x;
        if (v <= 0) continue;
        v = v * v * v;
        double u = uniform_pos();
        if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
    }
}

Vec CounterRng::sphere_dir(int dim) {
    for (;;) {
        Vec v(dim);
        double n2 = 0;
        for (int i = 0; i < dim; ++i) {
            v[i] = normal();
            n2 += v[i] * v[i];
        }
        if (n2 > 1e-300) {
            v *= 1.0 / std::sqrt(n2);
            return v;
        }
    }
}

double sphere_area(int N) { return 2.0 * std::pow(pi, N / 2.0) / std::tgamma(N / 2.0); }

namespace {
std::atomic<int> g_default_threads{0};
}

void set_default_threads(int n) { g_default_threads.store(n < 0 ? 0 : n); }
int default_threads() { return g_default_threads.load(); }

namespace {

class StudentComponent final : public ProposalComponent {
  public:
    StudentComponent(Vec center, double sigma, double alpha)
        : x_(center), sigma_(sigma), alpha_(alpha), N_(center.dim()) {
        log_norm_ = std::lgamma((N_ + alpha) / 2.0) - std::lgamma(alpha / 2.0) -
                    (N_ / 2.0) * std::log(alpha * pi) - N_ * std::log(sigma);
    }

    Vec sample(CounterRng& rng) const override {
        double g = rng.gamma(alpha_ / 2.0);        // chi^2_alpha / 2
        double scale = std::sqrt(alpha_ / (2.0 * g));
        Vec z = x_;
        for (int i = 0; i < N_; ++i) z[i] += sigma_ * scale * rng.normal();
        return z;
    }

    double pdf(const Vec& z) const override {
        double t2 = 0;
        for (int i = 0; i < N_; ++i) {
            double d = (z[i] - x_[i]) / sigma_;
            t2 += d * d;
        }
        return std::exp(log_norm_ - (N_ + alpha_) / 2.0 * std::log1p(t2 / alpha_));
    }

  private:
    Vec x_;
    double sigma_, alpha_, log_norm_ = 0;
    int N_;
};

class KernelComponent final : public ProposalComponent {
  public:
    KernelComponent(Vec center, double radius)
        : x_(center), s_(radius), N_(center.dim()), norm_(2.0 / (sphere_area(N_) * s_ * s_)) {}

    Vec sample(CounterRng& rng) const override {
        // radial density r^{2-N} r^{N-1} = r on [0, s]
        double r = s_ * std::sqrt(rng.uniform_pos());
        Vec dir = rng.sphere_dir(N_);
        Vec z = x_;
        for (int i = 0; i < N_; ++i) z[i] += r * dir[i];
        return z;
    }

    double pdf(const Vec& z) const override {
        double r = dist(z, x_);
        if (r >= s_ || r == 0.0) return 0.0;
        return norm_ * std::pow(r, 2 - N_);
    }

  private:
    Vec x_;
    double s_;
    int N_;
    double norm_;
};

}  // namespace

std::unique_ptr<ProposalComponent> student_component(Vec center, double sigma, double alpha) {
    if (!(sigma > 0) || !(alpha > 0)) throw std::invalid_argument("student_component: bad params");
    return std::make_unique<StudentComponent>(center, sigma, alpha);
}

std::unique_ptr<ProposalComponent> kernel_component(Vec center, double radius) {
    if (!(radius > 0) || center.dim() < 3)
        throw std::invalid_argument("kernel_component: bad params");
    return std::make_unique<KernelComponent>(center, radius);
}

void Mixture::add(double w, std::unique_ptr<ProposalComponent> c) {
    if (!(w > 0)) throw std::invalid_argument("Mixture::add: weight must be positive");
    weights.push_back(w);
    components.emplace_back(std::move(c));
}

void Mixture::normalize() {
    double s = 0;
    for (double w : weights) s += w;
    if (!(s > 0)) throw std::invalid_argument("Mixture::normalize: empty mixture");
    for (double& w : weights) w /= s;
}

Vec Mixture::sample(CounterRng& rng) const {
    double u = rng.uniform();
    double acc = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc || i + 1 == weights.size()) return components[i]->sample(rng);
    }
    return components.back()->sample(rng);
}

double Mixture::pdf(const Vec& z) const {
    double q = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) q += weights[i] * components[i]->pdf(z);
    return q;
}

Mixture make_proposal(ProposalClass cls, const core::PolygonConfig& cfg) {
    const int N = cfg.pair.N;
    Mixture mix;
    Vec origin(N);
    double bubble_scale = 1.0 / cfg.mu;

    switch (cls) {
        case ProposalClass::bubble_core: {
            mix.id = "bubble_core_k" + std::to_string(cfg.k);
            for (const Vec& x : cfg.centers) {
                mix.add(1.0, student_component(x, bubble_scale, 2.0));
                mix.add(0.5, student_component(x, 10.0 * bubble_scale, 1.0));
            }
            mix.add(0.5 * cfg.k, student_component(origin, cfg.r > 0 ? cfg.r : 1.0, 1.0));
            break;
        }
        case ProposalClass::interaction: {
            mix.id = "interaction_k" + std::to_string(cfg.k);
            for (const Vec& x : cfg.centers) {
                mix.add(1.0, student_component(x, bubble_scale, 2.0));
                mix.add(0.5, student_component(x, 10.0 * bubble_scale, 1.0));
            }
            // midpoints of adjacent center pairs, scale ~ half the gap
            if (cfg.k >= 2) {
                double gap = dist(cfg.centers[1], cfg.centers[0]);
                for (int j = 0; j < cfg.k; ++j) {
                    Vec m = cfg.centers[static_cast<std::size_t>(j)] +
                            cfg.centers[static_cast<std::size_t>((j + 1) % cfg.k)];
                    m *= 0.5;
                    mix.add(0.5, student_component(m, 0.5 * gap, 1.5));
                }
            }
            mix.add(0.5 * cfg.k, student_component(origin, cfg.r > 0 ? cfg.r : 1.0, 1.0));
            break;
        }
        case ProposalClass::inner_bubble: {
            mix.id = "inner_bubble_k" + std::to_string(cfg.k);
            mix.add(2.0, student_component(origin, 1.0 / cfg.mu0, 2.0));
            mix.add(1.0, student_component(origin, cfg.r > 0 ? cfg.r : 1.0, 1.0));
            for (const Vec& x : cfg.centers)
                mix.add(1.0 / cfg.k, student_component(x, bubble_scale, 2.0));
            break;
        }
    }
    mix.normalize();
    return mix;
}

namespace {

struct StreamAccum {
    std::vector<double> sum, sumsq;
    double max_abs_w = 0, sum_abs_w = 0;
    std::uint64_t n = 0;
};

StreamAccum run_stream(const VectorIntegrand& f, std::size_t m, const Mixture& proposal,
                       std::uint64_t seed, int stream, std::uint64_t n_samples, int fold_k) {
    CounterRng rng(seed, static_cast<std::uint64_t>(stream));
    StreamAccum acc;
    acc.sum.assign(m, 0.0);
    acc.sumsq.assign(m, 0.0);
    std::vector<double> comp(m, 0.0), comp2(m, 0.0), fv(m, 0.0);
    for (std::uint64_t i = 0; i < n_samples; ++i) {
        Vec z = proposal.sample(rng);
        double q;
        if (fold_k > 0) {
            // folded density: the proposal pushed forward through all k
            // rotations; the sample itself is folded into the first sector
            // dividing the orbit sum by k turns the sector estimate into the
            // whole-space integral of a k-fold symmetric integrand directly
            double qf = 0;
            for (int j = 1; j <= fold_k; ++j) qf += proposal.pdf(core::rotate(z, j, fold_k));
            z = core::fold_to_first_sector(z, fold_k);
            q = qf / fold_k;
        } else {
            q = proposal.pdf(z);
        }
        if (!(q > 0)) continue;  // outside proposal support (measure-zero events)
        f(z, fv.data());
        double first_w = 0;
        for (std::size_t j = 0; j < m; ++j) {
            double w = fv[j] / q;
            if (j == 0) first_w = w;
            double y = w - comp[j];
            double t = acc.sum[j] + y;
            comp[j] = (t - acc.sum[j]) - y;
            acc.sum[j] = t;
            double y2 = w * w - comp2[j];
            double t2 = acc.sumsq[j] + y2;
            comp2[j] = (t2 - acc.sumsq[j]) - y2;
            acc.sumsq[j] = t2;
        }
        double aw = std::abs(first_w);
        acc.sum_abs_w += aw;
        if (aw > acc.max_abs_w) acc.max_abs_w = aw;
        ++acc.n;
    }
    return acc;
}

}  // namespace

std::vector<McEstimate> integrate_vector(const VectorIntegrand& f, std::size_t m,
                                         const Mixture& proposal, std::uint64_t budget,
                                         std::uint64_t seed, const IntegrateOptions& opts) {
    if (m == 0) throw std::invalid_argument("integrate_vector: no integrands");
    if (budget == 0) throw std::invalid_argument("integrate_vector: zero budget");
    const int S = opts.streams;
    if (S < 1) throw std::invalid_argument("integrate_vector: need streams >= 1");

    std::vector<std::uint64_t> n_of(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s)
        n_of[static_cast<std::size_t>(s)] =
            budget / S + (static_cast<std::uint64_t>(s) < budget % S ? 1 : 0);

    int want = opts.threads > 0 ? opts.threads : default_threads();
    unsigned hw = want > 0 ? static_cast<unsigned>(want)
                           : std::max(1u, std::thread::hardware_concurrency());
    std::vector<StreamAccum> results(static_cast<std::size_t>(S));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (;;) {
            int s = next.fetch_add(1);
            if (s >= S) break;
            results[static_cast<std::size_t>(s)] =
                run_stream(f, m, proposal, seed, s, n_of[static_cast<std::size_t>(s)], opts.fold_k);
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<unsigned>(hw, static_cast<unsigned>(S)); ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    // deterministic merge in stream order
    std::uint64_t n = 0;
    double max_w = 0, sum_w = 0;
    std::vector<double> sum(m, 0.0), sumsq(m, 0.0);
    for (const auto& r : results) {
        n += r.n;
        max_w = std::max(max_w, r.max_abs_w);
        sum_w += r.sum_abs_w;
        for (std::size_t j = 0; j < m; ++j) {
            sum[j] += r.sum[j];
            sumsq[j] += r.sumsq[j];
        }
    }
    if (n == 0) throw std::runtime_error("integrate_vector: no valid samples");

    double mean_w = sum_w / double(n);
    double ratio = mean_w > 0 ? max_w / mean_w : 0.0;

    std::vector<McEstimate> out(m);
    for (std::size_t j = 0; j < m; ++j) {
        double mean = sum[j] / double(n);
        double var = std::max(0.0, sumsq[j] / double(n) - mean * mean);
        out[j].value = mean;
        out[j].stderr_ = std::sqrt(var / double(n));
        out[j].n = n;
        out[j].seed = seed;
        out[j].proposal_id = proposal.id;
        out[j].max_weight_ratio = ratio;
        out[j].reliable = ratio <= 1e3;
    }
    return out;
}

std::vector<McEstimate> integrate_multi(const std::vector<Integrand>& fs, const Mixture& proposal,
                                        std::uint64_t budget, std::uint64_t seed,
                                        const IntegrateOptions& opts) {
    auto vf = [&fs](const Vec& z, double* out) {
        for (std::size_t j = 0; j < fs.size(); ++j) out[j] = fs[j](z);
    };
    return integrate_vector(vf, fs.size(), proposal, budget, seed, opts);
}

McEstimate integrate(const Integrand& f, const Mixture& proposal, std::uint64_t budget,
                     std::uint64_t seed, const IntegrateOptions& opts) {
    return integrate_multi({f}, proposal, budget, seed, opts)[0];
}

}  // namespace crown::quad
