#include <gtest/gtest.h>

#include <cmath>

#include "ggl/errors.hpp"
#include "ggl/graph.hpp"
#include "ggl/nets.hpp"
#include "ggl/rng.hpp"

using namespace ggl;

namespace {

Mat random_input(int rows, int cols, Rng& rng) {
  Mat x(rows, cols);
  for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = rng.uniform(-1, 1);
  return x;
}

void zero_all_but_output_bias(Network& net, double bias) {
  for (Parameter* p : net.parameters()) p->value.setZero();
  net.param("b_out").value.setConstant(bias);
}

std::vector<Graph> generators(int n) {
  std::vector<Graph> out = {make_graph(GraphKind::cycle, n), make_graph(GraphKind::star, n),
                            make_graph(GraphKind::complete, n), make_graph(GraphKind::random_spanning_tree, n, 11)};
  if (n % 2 == 0 && n >= 4) out.push_back(make_graph(GraphKind::complete_bipartite, n));
  return out;
}

// Independent count: per hidden layer W (M(N + 2|E|)), h and g (MN each),
// b (N); output reads {i} and its neighbours plus one bias.
long ntm_oracle_count(const Graph& g, int depth, int channels, int player) {
  const long n = g.n(), e = g.edge_count();
  return (depth - 1) * (channels * (3 * n + 2 * e) + n) + g.degree(player) + 2;
}

}  // namespace

TEST(FNN, ZeroWeightsGiveOutputBias) {
  Rng rng(1);
  FNN net({{4, 8, 8, 1}, Activation::tanh, false}, rng);
  zero_all_but_output_bias(net, 0.75);
  Mat y = net.evaluate(random_input(5, 4, rng));
  for (Eigen::Index k = 0; k < y.size(); ++k) EXPECT_DOUBLE_EQ(y.data()[k], 0.75);
}

TEST(FNN, IdentityLayerSumsInputs) {
  Rng rng(2);
  FNN net({{3, 3, 1}, Activation::relu, false}, rng);
  for (Parameter* p : net.parameters()) p->value.setZero();
  net.param("W0").value = Mat::Identity(3, 3);
  net.param("w_out").value.setOnes();
  Mat x(2, 3);
  x << 0.1, 0.2, 0.3, 1, 2, 3;
  Mat y = net.evaluate(x);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.6);
  EXPECT_DOUBLE_EQ(y(1, 0), 6.0);
}

TEST(FNN, SkipOnlyWhereWidthsMatch) {
  Rng a(3), b(3);
  FNN plain({{5, 5, 5, 1}, Activation::tanh, false}, a);
  FNN skip({{5, 5, 5, 1}, Activation::tanh, true}, b);
  Rng rng(4);
  Mat x = random_input(3, 5, rng);
  EXPECT_GT((plain.evaluate(x) - skip.evaluate(x)).cwiseAbs().maxCoeff(), 1e-6);
  Rng c(5), d(5);
  FNN p2({{10, 32, 1}, Activation::relu, false}, c);
  FNN s2({{10, 32, 1}, Activation::relu, true}, d);
  EXPECT_EQ(p2.evaluate(x.leftCols(5).replicate(1, 2)), s2.evaluate(x.leftCols(5).replicate(1, 2)));
}

TEST(FNN, GradientCheck) {
  Rng rng(6);
  for (Activation act : {Activation::tanh, Activation::relu}) {
    FNN net({{6, 7, 7, 2}, act, true}, rng);
    EXPECT_LT(network_gradient_check(net, random_input(4, 6, rng), rng), 1e-5);
  }
}

TEST(FNN, RejectsBadSpecsAndShapes) {
  Rng rng(7);
  EXPECT_THROW(FNN({{3, 1}, Activation::tanh, false}, rng), ParameterError);
  EXPECT_THROW(FNN({{3, 0, 1}, Activation::tanh, false}, rng), ParameterError);
  FNN net({{3, 4, 1}, Activation::tanh, false}, rng);
  EXPECT_THROW(net.evaluate(Mat::Zero(2, 4)), ShapeError);
}

TEST(ParamCount, ExperimentFnnHas385) {
  NetworkSpec s;
  s.kind = ArchKind::fnn;
  s.fnn = {{10, 32, 1}, Activation::relu, true};
  EXPECT_EQ(count_params(s, make_graph(GraphKind::cycle, 10)).trainable, 385);
}

TEST(ParamCount, WidthNFnnFormula) {
  EXPECT_EQ(fnn_width_n_count(10, 3), 231);
  for (int n = 3; n <= 20; ++n)
    for (int k = 2; k <= 4; ++k) {
      NetworkSpec s;
      s.kind = ArchKind::fnn;
      s.fnn.layer_sizes.assign(k + 1, n);
      s.fnn.layer_sizes.back() = 1;
      EXPECT_EQ(count_params(s, make_graph(GraphKind::cycle, n)).trainable, fnn_width_n_count(n, k));
    }
}

TEST(ParamCount, NtmExactCountAndBound) {
  EXPECT_EQ(ntm_param_bound(10, 9, 3, 3), 359);
  for (int n = 4; n <= 20; ++n)
    for (const Graph& g : generators(n))
      for (int k = 2; k <= 4; ++k)
        for (int m : {1, 3}) {
          NetworkSpec s;
          s.kind = ArchKind::ntm;
          s.ntm.depth = k;
          s.ntm.channels = m;
          s.ntm.player = n / 2;
          ParamCount c = count_params(s, g);
          EXPECT_EQ(c.trainable, ntm_oracle_count(g, k, m, n / 2));
          EXPECT_LE(c.trainable, ntm_param_bound(n, g.edge_count(), k, m));
        }
}

TEST(NTM, ZeroWeightsGiveOutputBias) {
  Rng rng(8);
  Graph g = make_graph(GraphKind::cycle, 6);
  NTM net(g, {.player = 2, .depth = 3, .channels = 2}, rng);
  zero_all_but_output_bias(net, -1.25);
  Mat y = net.evaluate(random_input(4, 6, rng));
  for (Eigen::Index k = 0; k < y.size(); ++k) EXPECT_DOUBLE_EQ(y.data()[k], -1.25);
}

TEST(NTM, FrozenPatternFollowsLaplacian) {
  Rng rng(9);
  Graph g = make_graph(GraphKind::random_spanning_tree, 8, 4);
  Eigen::MatrixXd lmask = laplacian_mask(g);
  NTM net(g, {.player = 1, .depth = 3, .channels = 3}, rng);
  const Mat& w = net.param("W1").mask;
  for (int q = 0; q < 8; ++q)
    for (int p = 0; p < 8; ++p)
      for (int r = 0; r < 3; ++r) EXPECT_EQ(w(q, net.channel_col(p, r, 0)), lmask(p, q));
  const Mat& out = net.param("W_out").mask;
  for (int q = 0; q < 8; ++q) EXPECT_EQ(out(q, 0), lmask(1, q));
  // Frozen entries are exactly zero.
  for (const Parameter* p : static_cast<const Network&>(net).parameters())
    for (Eigen::Index k = 0; k < p->value.size(); ++k)
      if (p->mask.data()[k] == 0.0) EXPECT_EQ(p->value.data()[k], 0.0);
}

TEST(NTM, MisspecifiedPlayerChangesOutputPattern) {
  Rng a(10), b(10);
  Graph g = make_graph(GraphKind::star, 6);
  NTM right(g, {.player = 0, .depth = 3, .channels = 3}, a);
  NTM wrong(g, {.player = 3, .depth = 3, .channels = 3}, b);
  EXPECT_NE(right.param("W_out").mask, wrong.param("W_out").mask);
  EXPECT_EQ(right.param("W1").mask, wrong.param("W1").mask);
}

TEST(NTM, ReceptiveFieldIsDepthHops) {
  Rng rng(11);
  Graph g = make_graph(GraphKind::cycle, 10);
  for (int depth = 2; depth <= 4; ++depth) {
    NTM net(g, {.player = 0, .depth = depth, .channels = 3}, rng);
    auto dist = g.bfs_distances(0);
    Tape t;
    Var x = t.input(random_input(16, 10, rng));
    t.backward(sum(net.forward(t, x, false)));
    Mat grad = t.grad(x);
    for (int j = 0; j < 10; ++j) {
      double mag = grad.col(j).cwiseAbs().maxCoeff();
      if (dist[j] > depth)
        EXPECT_EQ(mag, 0.0) << "depth " << depth << " vertex " << j;
      else
        EXPECT_GT(mag, 0.0) << "depth " << depth << " vertex " << j;
    }
  }
}

TEST(NTM, GradientCheckAllModes) {
  Rng rng(12);
  Graph g = make_graph(GraphKind::star, 5);
  std::vector<NTMSpec> specs = {
      {.player = 0, .depth = 3, .channels = 2, .activation = Activation::tanh},
      {.player = 2, .depth = 2, .channels = 3, .activation = Activation::tanh, .skip = true},
      {.player = 1, .depth = 3, .channels = 2, .hidden_dim = 2, .d_in = 2, .d_out = 2, .activation = Activation::tanh},
      {.player = 0, .depth = 2, .channels = 3, .activation = Activation::tanh, .skip = true, .vector_output = true},
  };
  for (const NTMSpec& s : specs) {
    NTM net(g, s, rng);
    EXPECT_LT(network_gradient_check(net, random_input(3, net.input_dim(), rng), rng), 1e-5);
  }
}

TEST(NTM, VectorOutputMaskFollowsLaplacian) {
  Rng rng(13);
  Graph g = make_graph(GraphKind::cycle, 6);
  NTM net(g, {.depth = 2, .channels = 3, .skip = true, .vector_output = true}, rng);
  EXPECT_EQ(net.output_dim(), 6);
  Eigen::MatrixXd lmask = laplacian_mask(g);
  EXPECT_EQ(net.param("W_out").mask, Mat(lmask));
}

TEST(NTM, RejectsInvalidSpecs) {
  Rng rng(14);
  Graph g = make_graph(GraphKind::cycle, 5);
  EXPECT_THROW(NTM(g, {.depth = 1}, rng), ParameterError);
  EXPECT_THROW(NTM(g, {.player = 5}, rng), ParameterError);
  EXPECT_THROW(NTM(g, {.channels = 0}, rng), ParameterError);
  EXPECT_THROW(NTM(g, {.d_out = 2}, rng), ParameterError);
  EXPECT_THROW(NTM(g, {.hidden_dim = 2, .vector_output = true}, rng), ParameterError);
}

TEST(Cheb, ScaledLaplacianOfSingleEdge) {
  double lmax = 0;
  Mat s = scaled_laplacian(make_graph(GraphKind::complete, 2), &lmax);
  EXPECT_NEAR(lmax, 2.0, 1e-10);
  EXPECT_NEAR(s(0, 0), 0.0, 1e-10);
  EXPECT_NEAR(s(0, 1), -1.0, 1e-10);
}

TEST(Cheb, ZeroWeightsGiveOutputBias) {
  Rng rng(15);
  ChebGCN net(make_graph(GraphKind::star, 6), {}, rng);
  zero_all_but_output_bias(net, 0.3);
  Mat y = net.evaluate(random_input(3, 6, rng));
  for (Eigen::Index k = 0; k < y.size(); ++k) EXPECT_DOUBLE_EQ(y.data()[k], 0.3);
}

TEST(Cheb, GradientCheck) {
  Rng rng(16);
  ChebGCN net(make_graph(GraphKind::cycle, 5), {{1, 6, 4, 1}, Activation::tanh}, rng);
  EXPECT_LT(network_gradient_check(net, random_input(3, 5, rng), rng), 1e-5);
  EXPECT_THROW(ChebGCN(make_graph(GraphKind::cycle, 5), {{2, 4, 1}, Activation::relu}, rng), ParameterError);
}

TEST(Cheb, MatchesDirectFormula) {
  Rng rng(17);
  Graph g = make_graph(GraphKind::cycle, 5);
  ChebGCN net(g, {{1, 3, 1}, Activation::tanh}, rng);
  for (Parameter* p : net.parameters())
    for (Eigen::Index k = 0; k < p->value.size(); ++k) p->value.data()[k] = rng.uniform(-1, 1);
  Mat x = random_input(1, 5, rng);
  Mat lt = net.scaled_laplacian();
  // Layer 1: z is N x 1; z W1 + Lt z W2 + 1 b, then tanh; layer 2 maps 3 -> 1.
  Mat z = x.transpose();
  Mat z1 = (z * net.param("W1_1").value + lt * z * net.param("W1_2").value +
            Mat::Ones(5, 1) * net.param("b1").value).array().tanh().matrix();
  Mat z2 = (z1 * net.param("W2_1").value + lt * z1 * net.param("W2_2").value +
            Mat::Ones(5, 1) * net.param("b2").value).array().tanh().matrix();
  double want = (z2.transpose() * net.param("w_out").value)(0, 0) + net.param("b_out").value(0, 0);
  EXPECT_NEAR(net.evaluate(x)(0, 0), want, 1e-12);
}

TEST(Arch, ParseAndFactory) {
  EXPECT_EQ(parse_arch("ntm"), ArchKind::ntm);
  EXPECT_EQ(to_string(ArchKind::cheb), "cheb");
  EXPECT_THROW(parse_arch("gcn2"), ParameterError);
  EXPECT_EQ(parse_activation("tanh"), Activation::tanh);
  EXPECT_THROW(parse_activation("gelu"), ParameterError);
}
