#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "crown/core.hpp"
#include "crown/vec.hpp"

namespace crown::quad {

// Counter-based generator: the j-th draw of a stream depends only on
// (seed, stream, j), so parallel sub-streams replay bit-for-bit regardless
// of thread scheduling.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    double uniform();               // [0, 1)
    double uniform_pos();           // (0, 1)
    double normal();                // standard normal (Box-Muller, two draws)
    double gamma(double shape);     // Gamma(shape, 1), Marsaglia-Tsang
    Vec sphere_dir(int dim);        // uniform on S^{dim-1}

  private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

// One normalized density on R^N with a sampler.
struct ProposalComponent {
    virtual ~ProposalComponent() = default;
    virtual Vec sample(CounterRng& rng) const = 0;
    virtual double pdf(const Vec& z) const = 0;
};

// Multivariate Student-t: center x, scale sigma, dof alpha. Heavy algebraic
// tails keep importance weights bounded against power-law integrands.
std::unique_ptr<ProposalComponent> student_component(Vec center, double sigma, double alpha);

// Density proportional to |z - y|^{2-N} on the ball |z - y| <= s. Cancels the
// Newtonian kernel singularity so weights stay finite near y.
std::unique_ptr<ProposalComponent> kernel_component(Vec center, double radius);

struct Mixture {
    std::string id;
    std::vector<double> weights;  // positive, summing to 1
    std::vector<std::shared_ptr<const ProposalComponent>> components;

    void add(double w, std::unique_ptr<ProposalComponent> c);
    void normalize();
    Vec sample(CounterRng& rng) const;
    double pdf(const Vec& z) const;
};

// Concentration sets taken from the integral classes that actually occur:
// mass around every bubble center, mass on the segments between adjacent
// centers, or mass at the origin. Each includes a broad background component.
enum class ProposalClass { bubble_core, interaction, inner_bubble };

Mixture make_proposal(ProposalClass cls, const core::PolygonConfig& cfg);

struct McEstimate {
    double value = 0;
    double stderr_ = 0;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::string proposal_id;
    double max_weight_ratio = 0;  // max |f/q| over mean |f/q|
    bool reliable = true;         // false when max_weight_ratio > 1e3
};

struct IntegrateOptions {
    int fold_k = 0;    // > 0: fold samples into the first sector of a k-gon
                       // and scale the estimate by k (symmetric integrands)
    int streams = 64;  // independent sub-streams (fixed for replay)
    int threads = 0;   // 0 = hardware concurrency
};

using Integrand = std::function<double(const Vec&)>;

// m integrand values written per sample point; lets related integrals share
// one (possibly expensive) field evaluation
using VectorIntegrand = std::function<void(const Vec&, double* out)>;

std::vector<McEstimate> integrate_vector(const VectorIntegrand& f, std::size_t m,
                                         const Mixture& proposal, std::uint64_t budget,
                                         std::uint64_t seed, const IntegrateOptions& opts = {});

McEstimate integrate(const Integrand& f, const Mixture& proposal, std::uint64_t budget,
                     std::uint64_t seed, const IntegrateOptions& opts = {});

// Shared-sample estimation of several integrands at once (correlated
// estimates, useful for exact cancellation between related integrals).
std::vector<McEstimate> integrate_multi(const std::vector<Integrand>& fs, const Mixture& proposal,
                                        std::uint64_t budget, std::uint64_t seed,
                                        const IntegrateOptions& opts = {});

// Surface area of the unit sphere S^{N-1} in R^N.
double sphere_area(int N);

// Process-wide worker pool size used when IntegrateOptions.threads == 0;
// 0 (the initial value) means hardware concurrency. Thread counts never
// affect results: stream decomposition is fixed by IntegrateOptions.streams.
void set_default_threads(int n);
int default_threads();

}  // namespace crown::quad
