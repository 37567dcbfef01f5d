#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "grad_check.hpp"
#include "oracles.hpp"
#include "pacs/error.hpp"
#include "pacs/loss.hpp"
#include "synthetic.hpp"

using namespace pacs;

namespace {

Eigen::MatrixXd unit_rows(Eigen::MatrixXd m) {
  normalize_rows(m);
  return m;
}

Heads random_heads(Eigen::Index dv, Eigen::Index dt, Eigen::Index joint, Rng& rng) {
  return {ProjectionHead(synth::gaussian(dv, joint, rng)),
          ProjectionHead(synth::gaussian(dt, joint, rng))};
}

}  // namespace

TEST_CASE("info_nce of a single pair is zero") {
  Eigen::MatrixXd a(1, 3);
  a << 0.6, 0.8, 0.0;
  Eigen::MatrixXd b(1, 3);
  b << 0.0, 0.0, 1.0;
  CHECK(info_nce(a, b, 0.07) == 0.0);
}

TEST_CASE("info_nce 2x2 identity at tau = 1") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  // 2 * -log(e / (e + 1)), evaluated independently.
  CHECK(info_nce(eye, eye, 1.0) == doctest::Approx(0.6265233750364456).epsilon(1e-12));

  std::vector<EmbeddingVector> v{l2_normalize(FeatureVector{1, 0}), l2_normalize(FeatureVector{0, 1})};
  CHECK(info_nce(v, v, 1.0) == doctest::Approx(0.6265233750364456).epsilon(1e-12));
}

TEST_CASE("info_nce matches the double-loop oracle") {
  Rng rng(2024);
  for (double tau : {0.05, 0.1, 1.0}) {
    Eigen::MatrixXd v = unit_rows(synth::gaussian(8, 5, rng));
    Eigen::MatrixXd t = unit_rows(synth::gaussian(8, 5, rng));
    const double want = oracle::info_nce(oracle::to_rows(v), oracle::to_rows(t), tau);
    CHECK(std::abs(info_nce(v, t, tau) - want) < 1e-10);
  }
}

TEST_CASE("info_nce with identical similarity rows is 2 log N") {
  for (Eigen::Index n : {2, 3, 4, 8, 64}) {
    // Every image equals every text -> all cosines are 1.
    Eigen::MatrixXd same = Eigen::MatrixXd::Zero(n, 4);
    same.col(0).setOnes();
    CHECK(std::abs(info_nce(same, same, 0.01) - 2.0 * std::log(static_cast<double>(n))) < 1e-9);
  }
}

TEST_CASE("info_nce error paths") {
  Eigen::MatrixXd empty(0, 3);
  CHECK_THROWS_AS(info_nce(empty, empty, 1.0), Error);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
  CHECK_THROWS_AS(info_nce(eye, eye, 0.0), Error);
  CHECK_THROWS_AS(info_nce(eye, eye, -1.0), Error);
  Eigen::MatrixXd three = Eigen::MatrixXd::Identity(3, 2);
  CHECK_THROWS_AS(info_nce(eye, three, 1.0), Error);
}

TEST_CASE("pac_loss reduces to info_nce on real pairs with zero lambdas") {
  Rng rng(1);
  const PacBatch b = synth::random_batch(6, 7, 5, rng);
  const Heads h = random_heads(7, 5, 4, rng);
  const LossConfig cfg{0.1, 0.0, 0.0};
  const double direct =
      info_nce(project_rows(b.visual, h.visual), project_rows(b.text, h.textual), cfg.tau);
  CHECK(pac_loss(b, h, cfg) == direct);
}

TEST_CASE("pac_loss is the weighted sum of three independently computed terms") {
  Rng rng(8);
  const PacBatch b = synth::random_batch(4, 6, 5, rng);
  const Heads h = random_heads(6, 5, 3, rng);
  const LossConfig cfg{0.1, 0.05, 0.1};

  auto project_all = [](const Eigen::MatrixXd& x, const ProjectionHead& head) {
    oracle::Mat out;
    for (const auto& row : oracle::to_rows(x)) out.push_back(oracle::project(row, head.weights()));
    return out;
  };
  const auto v = project_all(b.visual, h.visual);
  const auto t = project_all(b.text, h.textual);
  const auto vg = project_all(b.visual_gen, h.visual);
  const auto tg = project_all(b.text_gen, h.textual);
  const double l1 = oracle::info_nce(v, t, cfg.tau);
  const double l2 = oracle::info_nce(vg, t, cfg.tau);
  const double l3 = oracle::info_nce(v, tg, cfg.tau);

  const PacLossTerms terms = pac_loss_terms(b, h, cfg);
  CHECK(std::abs(terms.real - l1) < 1e-10);
  CHECK(std::abs(terms.generated_image - l2) < 1e-10);
  CHECK(std::abs(terms.generated_text - l3) < 1e-10);
  CHECK(std::abs(terms.total - (l1 + 0.05 * l2 + 0.1 * l3)) < 1e-10);
}

TEST_CASE("duplicated positives scale the real loss") {
  Rng rng(9);
  PacBatch b = synth::random_batch(5, 6, 6, rng);
  b.visual_gen = b.visual;
  b.text_gen = b.text;
  const Heads h = random_heads(6, 6, 4, rng);
  const LossConfig cfg{0.2, 0.05, 0.1};
  const double real = pac_loss(b, h, LossConfig{0.2, 0.0, 0.0});
  CHECK(pac_loss(b, h, cfg) == doctest::Approx((1.0 + 0.05 + 0.1) * real).epsilon(1e-12));
}

TEST_CASE("pac_loss is invariant under permuting the batch") {
  Rng rng(12);
  const PacBatch b = synth::random_batch(7, 5, 4, rng);
  const Heads h = random_heads(5, 4, 3, rng);
  const LossConfig cfg{0.05, 0.05, 0.1};
  std::vector<Eigen::Index> perm(7);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(std::span<Eigen::Index>(perm));
  PacBatch p = b;
  for (Eigen::Index i = 0; i < 7; ++i) {
    p.visual.row(i) = b.visual.row(perm[i]);
    p.text.row(i) = b.text.row(perm[i]);
    p.visual_gen.row(i) = b.visual_gen.row(perm[i]);
    p.text_gen.row(i) = b.text_gen.row(perm[i]);
  }
  CHECK(std::abs(pac_loss(b, h, cfg) - pac_loss(p, h, cfg)) < 1e-10);
}

TEST_CASE("pac_loss rejects mismatched dims") {
  Rng rng(4);
  const PacBatch b = synth::random_batch(3, 5, 4, rng);
  const Heads h = random_heads(6, 4, 3, rng);
  CHECK_THROWS_AS(pac_loss(b, h, LossConfig{}), Error);
  PacBatch empty;
  CHECK_THROWS_AS(pac_loss(empty, random_heads(5, 4, 3, rng), LossConfig{}), Error);
}

TEST_CASE("analytic gradients match central finite differences") {
  Rng rng(31337);
  for (double tau : {0.01, 0.02, 0.1, 1.0}) {
    for (int trial = 0; trial < 4; ++trial) {
      const auto n = static_cast<Eigen::Index>(2 + rng.below(7));
      const auto dv = static_cast<Eigen::Index>(2 + rng.below(15));
      const auto dt = static_cast<Eigen::Index>(2 + rng.below(15));
      const auto joint = static_cast<Eigen::Index>(2 + rng.below(7));
      const PacBatch b = synth::random_batch(n, dv, dt, rng);
      const Heads h = random_heads(dv, dt, joint, rng);
      const auto report = gradcheck::check(b, h, LossConfig{tau, 0.05, 0.1});
      INFO("tau=" << tau << " n=" << n << " dv=" << dv << " dt=" << dt << " joint=" << joint);
      CHECK(report.worst() < 1e-4);
    }
  }
}

TEST_CASE("single pair with zero lambdas has zero loss and gradient") {
  Rng rng(77);
  const PacBatch b = synth::random_batch(1, 6, 5, rng);
  const Heads h = random_heads(6, 5, 3, rng);
  const PacLossGrad g = pac_loss_grad(b, h, LossConfig{0.01, 0.0, 0.0});
  CHECK(g.loss == 0.0);
  CHECK(g.grad_visual.cwiseAbs().maxCoeff() == 0.0);
  CHECK(g.grad_textual.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("temperature gradient matches finite differences in log tau") {
  Rng rng(55);
  const PacBatch b = synth::random_batch(6, 8, 8, rng);
  const Heads h = random_heads(8, 8, 4, rng);
  for (double tau : {0.02, 0.1, 0.5}) {
    const LossConfig cfg{tau, 0.05, 0.1};
    const double analytic = pac_loss_grad(b, h, cfg).grad_log_tau;
    const double step = 1e-6;
    const double plus = pac_loss(b, h, LossConfig{tau * std::exp(step), 0.05, 0.1});
    const double minus = pac_loss(b, h, LossConfig{tau * std::exp(-step), 0.05, 0.1});
    const double numeric = (plus - minus) / (2.0 * step);
    CHECK(std::abs(analytic - numeric) <= 1e-5 * std::max(1.0, std::abs(numeric)));
  }
}

TEST_CASE("gradient loss value equals pac_loss") {
  Rng rng(6);
  const PacBatch b = synth::random_batch(5, 4, 4, rng);
  const Heads h = random_heads(4, 4, 4, rng);
  const LossConfig cfg{0.1, 0.05, 0.1};
  CHECK(pac_loss_grad(b, h, cfg).loss == doctest::Approx(pac_loss(b, h, cfg)).epsilon(1e-13));
}
