#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ggl/autodiff.hpp"
#include "ggl/graph.hpp"
#include "ggl/rng.hpp"

namespace ggl {

enum class Activation { relu, tanh };

Activation parse_activation(const std::string& s);
std::string to_string(Activation a);

struct ParamCount {
  long trainable = 0;
  long frozen = 0;
};

class Network {
 public:
  virtual ~Network() = default;
  Network() = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  // x has shape B x input_dim(); the result is B x output_dim(). With
  // track_params = false the weights enter the tape as constants, so the
  // output still depends differentiably on x but no gradient reaches them.
  virtual Var forward(Tape& t, Var x, bool track_params = true) = 0;
  virtual int input_dim() const = 0;
  virtual int output_dim() const = 0;

  Mat evaluate(const Mat& x);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  Parameter& param(const std::string& name);
  ParamCount count_params() const;

 protected:
  Parameter& add_param(std::string name, Mat value, Mat mask);
  Var use(Tape& t, Parameter& p, bool track) const { return track ? t.param(p) : t.constant(p.value); }
  Var act(Var v) const { return activation_ == Activation::relu ? relu(v) : ggl::tanh(v); }

  Activation activation_ = Activation::relu;
  // Heap-allocated so the Parameter* held by a tape stays valid.
  std::vector<std::unique_ptr<Parameter>> params_;
};

struct FNNSpec {
  std::vector<int> layer_sizes;  // d_in, H_1, ..., d_out
  Activation activation = Activation::tanh;
  bool skip = false;
};

class FNN : public Network {
 public:
  FNN(const FNNSpec& spec, Rng& rng);
  Var forward(Tape& t, Var x, bool track_params = true) override;
  int input_dim() const override { return spec_.layer_sizes.front(); }
  int output_dim() const override { return spec_.layer_sizes.back(); }
  const FNNSpec& spec() const { return spec_; }

 private:
  FNNSpec spec_;
};

struct NTMSpec {
  int player = 0;  // 0-based vertex index (scalar mode)
  int depth = 2;   // K; the net has K-1 graph-masked hidden layers
  int channels = 1;
  int hidden_dim = 1;
  int d_in = 1;
  int d_out = 1;
  Activation activation = Activation::relu;
  bool skip = false;
  bool vector_output = false;
};

// Graph-masked network. Hidden activations are laid out as N blocks of width
// d (one per vertex); the per-layer weights are dense matrices whose frozen
// entries follow the Laplacian sparsity pattern.
//
//   u       = z W + h                     W: Nd x MNd, block (q, (p,r)) = W_{pr,q}^T
//   z_next  = [z] + act(u) G + b          G: MNd x Nd, diagonal g_{pr} per (p, r)
//
// In multi-dimensional mode (d_in != 1 or d != 1) the input is first mapped
// blockwise by W_in, b_in.
class NTM : public Network {
 public:
  NTM(const Graph& g, const NTMSpec& spec, Rng& rng);
  Var forward(Tape& t, Var x, bool track_params = true) override;
  int input_dim() const override { return n_ * spec_.d_in; }
  int output_dim() const override { return spec_.vector_output ? n_ : spec_.d_out; }
  const NTMSpec& spec() const { return spec_; }
  bool multi_dim() const { return spec_.d_in != 1 || spec_.hidden_dim != 1; }

  // Column of the hidden pre-activation for (vertex p, channel r, coordinate c).
  int channel_col(int p, int r, int c) const { return (p * spec_.channels + r) * spec_.hidden_dim + c; }

 private:
  int n_;
  NTMSpec spec_;
};

struct ChebSpec {
  std::vector<int> features = {1, 64, 1};  // F_1 = 1, ..., F_K = 1
  Activation activation = Activation::relu;
};

class ChebGCN : public Network {
 public:
  ChebGCN(const Graph& g, const ChebSpec& spec, Rng& rng);
  Var forward(Tape& t, Var x, bool track_params = true) override;
  int input_dim() const override { return n_; }
  int output_dim() const override { return 1; }
  const Mat& scaled_laplacian() const { return scaled_lap_; }
  double lambda_max() const { return lambda_max_; }

 private:
  int n_;
  ChebSpec spec_;
  Mat scaled_lap_;
  double lambda_max_;
};

// (2 / lambda_max) L - I
Mat scaled_laplacian(const Graph& g, double* lambda_max = nullptr);

enum class ArchKind { fnn, ntm, cheb };
ArchKind parse_arch(const std::string& s);
std::string to_string(ArchKind a);

struct NetworkSpec {
  ArchKind kind = ArchKind::fnn;
  FNNSpec fnn;
  NTMSpec ntm;
  ChebSpec cheb;
};

std::unique_ptr<Network> make_network(const NetworkSpec& spec, const Graph& g, Rng& rng);
ParamCount count_params(const NetworkSpec& spec, const Graph& g);

// (K-1)(N^2+N) + N + 1: width-N FNN with K-1 hidden layers and scalar output.
long fnn_width_n_count(int n, int depth);
// M(K-1)(4N + 2|E|) + N + 1
long ntm_param_bound(int n, int edges, int depth, int channels);

// Worst relative discrepancy between reverse-mode and central-difference
// derivatives of sum(w .* net(x)) for a fixed random weighting w, over all
// entries of x and all trainable parameter entries.
double network_gradient_check(Network& net, const Mat& x, Rng& rng, double h = 1e-6);

}  // namespace ggl
