#include <gtest/gtest.h>

#include <string>

#include "roomimp/bayes.hpp"
#include "roomimp/errors.hpp"
#include "roomimp/observation.hpp"

using namespace roomimp;

namespace {

PatchLayout room_layout() { return PatchLayout{{{0, Side::kLow}, {1, Side::kLow}}}; }

double max_rel_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    scale = std::max(scale, std::abs(a[j]));
    diff = std::max(diff, std::abs(a[j] - b[j]));
  }
  return diff / scale;
}

struct Case {
  int dim;
  double h;
  int level;
};

}  // namespace

class ReducedVsDirect : public ::testing::TestWithParam<Case> {};

TEST_P(ReducedVsDirect, AgreeOnPriorSamples) {
  const Case c = GetParam();
  const std::vector<double> ext = c.dim == 2 ? std::vector<double>{3.0, 3.5} : std::vector<double>{3.0, 3.5, 2.5};
  auto disc = make_discretization(refine_uniformly(build_box_mesh(ext, c.h, room_layout()), c.level));
  PhysicsParams phys;
  phys.f = 50.0;
  const Point s = c.dim == 2 ? Point{1.0, 1.0, 0.0} : Point{1.0, 1.0, 1.0};
  const std::vector<Point> mics = c.dim == 2
                                      ? std::vector<Point>{{0.4, 2.1, 0}, {0.6, 0.9, 0}, {1.4, 1.8, 0}, {2.2, 1.5, 0}}
                                      : std::vector<Point>{{0.6, 2.1, 1.2}, {2.0, 0.7, 0.6}, {1.7, 2.9, 1.9}};
  PriorSpec prior{{PatchPrior::random(300, 200, -600, 200), PatchPrior::random(600, 200, 900, 200)}};
  const DirectObservation direct(disc, phys, s, mics);
  const BoundaryReducedObservation reduced(disc, phys, s, mics, prior.mean_sample());
  EXPECT_EQ(reduced.microphone_count(), mics.size());
  Rng rng = make_stream(123, 0);
  for (int t = 0; t < 12; ++t) {
    const auto z = sample_prior(prior, rng);
    EXPECT_LE(max_rel_diff(direct.observe(z), reduced.observe(z)), 1e-9);
  }
  // the base sample itself and the sound-hard limit
  EXPECT_LE(max_rel_diff(direct.observe(prior.mean_sample()), reduced.observe(prior.mean_sample())), 1e-12);
  const double inf = std::numeric_limits<double>::infinity();
  const ImpedanceSample hard{{Complex(inf, 0.0), Complex(300.0, 10.0)}};
  EXPECT_LE(max_rel_diff(direct.observe(hard), reduced.observe(hard)), 1e-9);
}

INSTANTIATE_TEST_SUITE_P(Meshes, ReducedVsDirect,
                         ::testing::Values(Case{2, 0.343, 0}, Case{2, 0.343, 3}, Case{3, 0.5, 0}),
                         [](const ::testing::TestParamInfo<Case>& info) {
                           return "d" + std::to_string(info.param.dim) + "_level" + std::to_string(info.param.level);
                         });

TEST(ReducedMap, BoundaryNodeCount) {
  auto disc = make_discretization(build_box_mesh(std::vector<double>{3.0, 3.5}, 0.343, room_layout()));
  const BoundaryReducedObservation r(disc, PhysicsParams{}, Point{1, 1, 0}, {{2, 2, 0}},
                                     ImpedanceSample{{Complex(300, -600), Complex(600, 900)}});
  // x = 0 carries 12 nodes, y = 0 carries 10, sharing the corner
  EXPECT_EQ(r.boundary_nodes(), 21u);
}

TEST(ObservationMaps, RejectMismatchedSamples) {
  auto disc = make_discretization(build_box_mesh(std::vector<double>{3.0, 3.5}, 0.5, room_layout()));
  const ImpedanceSample base{{Complex(300, -600), Complex(600, 900)}};
  const auto direct = make_observation_map(ForwardMethod::kDirect, disc, PhysicsParams{}, Point{1, 1, 0},
                                           {{2, 2, 0}}, base);
  const auto reduced = make_observation_map(ForwardMethod::kBoundaryReduced, disc, PhysicsParams{},
                                            Point{1, 1, 0}, {{2, 2, 0}}, base);
  const ImpedanceSample one{{Complex(300, 1)}};
  EXPECT_THROW(direct->observe(one), InvalidArgument);
  EXPECT_THROW(reduced->observe(one), InvalidArgument);
  EXPECT_THROW(reduced->observe(ImpedanceSample{{Complex(-3, 1), Complex(1, 1)}}), InvalidImpedance);
}
