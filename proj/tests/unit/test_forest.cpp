#include <doctest.h>

#include <map>
#include <numeric>

#include "erf/forest.hpp"
#include "oracles.hpp"

using namespace erforest;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.n_trees = 12;
  c.max_depth = 4;
  c.seed = 77;
  return c;
}

}  // namespace

TEST_CASE("bootstrap from uniform probabilities is the classic bootstrap") {
  for (std::size_t n : {1u, 7u, 100u}) {
    const std::vector<double> probs(n, 1.0 / static_cast<double>(n));
    Rng a(3), b(3);
    CHECK(bootstrap_indices(n, probs, a) == uniform_bootstrap(n, b));
  }
}

TEST_CASE("weighted bootstrap follows the distribution") {
  const std::vector<double> probs{0.5, 0.0, 0.25, 0.25};
  Rng rng(19);
  std::vector<std::size_t> counts(4, 0);
  for (int rep = 0; rep < 2000; ++rep) {
    for (auto i : bootstrap_indices(4, probs, rng)) counts[i] += 1;
  }
  CHECK(counts[1] == 0);
  CHECK(static_cast<double>(counts[0]) / 8000.0 == doctest::Approx(0.5).epsilon(0.04));
  CHECK(static_cast<double>(counts[2]) / 8000.0 == doctest::Approx(0.25).epsilon(0.06));

  const std::vector<double> point{0.0, 1.0, 0.0};
  for (auto i : bootstrap_indices(3, point, rng)) CHECK(i == 1);

  const std::vector<double> bad{0.5, 0.6};
  CHECK_THROWS_AS(bootstrap_indices(2, bad, rng), std::invalid_argument);
  const std::vector<double> negative{1.5, -0.5};
  CHECK_THROWS_AS(bootstrap_indices(2, negative, rng), std::invalid_argument);
}

TEST_CASE("forest training does not depend on the thread count") {
  oracle::Gen g(4);
  auto d = oracle::random_dataset(g, 150, 5);
  std::vector<double> w(150), s(150);
  for (auto& v : w) v = g.real(0.2, 2.0);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < 150; ++i) s[i] = w[i] / total;
  const auto one = fit_forest(d, w, s, small_config(), 1);
  const auto three = fit_forest(d, w, s, small_config(), 3);
  CHECK(one.trees == three.trees);
  CHECK(one.bootstrap_log == three.bootstrap_log);
}

TEST_CASE("with weights and probabilities off the forest is a classic random forest") {
  oracle::Gen g(5);
  auto d = oracle::random_dataset(g, 90, 4);
  std::vector<double> w(90), s(90);
  for (auto& v : w) v = g.real(0.1, 3.0);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (std::size_t i = 0; i < 90; ++i) s[i] = w[i] / total;
  auto cfg = small_config();
  cfg.use_sample_weights = false;
  cfg.use_sample_probs = false;
  const auto forest = fit_forest(d, w, s, cfg);

  // Rebuild each tree by hand: uniform draws, multiplicity as the weight.
  for (std::size_t k = 0; k < forest.trees.size(); ++k) {
    Rng rng(derive_seed(cfg.seed, k));
    const auto draws = uniform_bootstrap(90, rng);
    CHECK(draws == forest.bootstrap_log[k]);
    std::vector<double> mult(90, 0.0);
    for (auto i : draws) mult[i] += 1.0;
    const auto tree = fit_tree(d.features, d.labels, mult, cfg, rng);
    CHECK(tree == forest.trees[k]);
  }

  // The weights passed in are ignored entirely.
  const std::vector<double> ones(90, 1.0);
  const std::vector<double> uniform(90, 1.0 / 90.0);
  const auto plain = fit_forest(d, ones, uniform, cfg);
  CHECK(plain.trees == forest.trees);
}

TEST_CASE("sample weights multiply into the bootstrap multiplicities") {
  oracle::Gen g(6);
  auto d = oracle::random_dataset(g, 60, 3);
  std::vector<double> w(60);
  for (auto& v : w) v = g.range(1, 4);
  const std::vector<double> uniform(60, 1.0 / 60.0);
  auto cfg = small_config();
  cfg.use_sample_probs = false;
  const auto forest = fit_forest(d, w, uniform, cfg);
  for (std::size_t k = 0; k < forest.trees.size(); ++k) {
    std::vector<double> row_weight(60, 0.0);
    for (auto i : forest.bootstrap_log[k]) row_weight[i] += w[i];
    const double expected = std::accumulate(row_weight.begin(), row_weight.end(), 0.0);
    CHECK(forest.trees[k].nodes[0].weight == doctest::Approx(expected));
  }
}

TEST_CASE("prediction is the uniform tree average and order-free") {
  oracle::Gen g(7);
  auto d = oracle::random_dataset(g, 80, 3);
  const std::vector<double> ones(80, 1.0), uniform(80, 1.0 / 80.0);
  auto forest = fit_forest(d, ones, uniform, small_config());
  auto reversed = forest;
  std::reverse(reversed.trees.begin(), reversed.trees.end());
  for (std::size_t r = 0; r < 80; ++r) {
    const auto per_tree = forest.predict_trees(d.features.row(r));
    const double mean = std::accumulate(per_tree.begin(), per_tree.end(), 0.0) / 12.0;
    CHECK(forest.predict(d.features.row(r)) == doctest::Approx(mean).epsilon(1e-14));
    CHECK(reversed.predict(d.features.row(r)) == doctest::Approx(mean).epsilon(1e-14));
  }
  const auto mdi = forest_mdi(forest);
  CHECK(std::accumulate(mdi.begin(), mdi.end(), 0.0) == doctest::Approx(1.0));
  auto single = forest;
  single.trees.resize(1);
  CHECK(forest_mdi(single) == tree_mdi(forest.trees[0]));
}

TEST_CASE("forest input validation") {
  oracle::Gen g(8);
  auto d = oracle::random_dataset(g, 10, 2);
  const std::vector<double> zero(10, 0.0), uniform(10, 0.1), short_w(9, 1.0);
  CHECK_THROWS(fit_forest(d, zero, uniform, small_config()));
  CHECK_THROWS_AS(fit_forest(d, short_w, uniform, small_config()), std::invalid_argument);
}
