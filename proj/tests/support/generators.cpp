// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "generators.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace testgen {

namespace {

int64_t ipick(std::mt19937& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

std::string dims_str(const oracle::Dims& d) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < d.size(); ++i) {
    if (i) os << ", ";
    os << d[i];
  }
  os << ")";
  return os.str();
}

int64_t total(const oracle::Dims& d) {
  return std::accumulate(d.begin(), d.end(), int64_t{1}, std::multiplies<int64_t>());
}

struct Builder {
  std::mt19937& rng;
  std::ostringstream body;
  std::vector<std::string> param_names;
  std::vector<oracle::Dims> param_shapes;
  std::vector<std::pair<std::string, oracle::Dims>> pool;
  int value_counter = 0;
  int op_count = 0;

  std::string new_param(const oracle::Dims& dims) {
    std::string name = "p" + std::to_string(param_names.size());
    param_names.push_back(name);
    param_shapes.push_back(dims);
    return name;
  }

  std::string emit(const std::string& rhs, const oracle::Dims& dims) {
    std::string name = "v" + std::to_string(value_counter++);
    body << "  let %" << name << " = " << rhs << ";\n";
    pool.emplace_back(name, dims);
    ++op_count;
    return name;
  }

  const std::pair<std::string, oracle::Dims>& pick(std::mt19937& r) {
    return pool[ipick(r, 0, static_cast<int64_t>(pool.size()) - 1)];
  }
};

oracle::Dims random_dims(std::mt19937& rng, int max_rank = 4, int64_t max_dim = 5) {
  int rank = static_cast<int>(ipick(rng, 1, max_rank));
  oracle::Dims d(rank);
  for (auto& x : d) x = ipick(rng, 1, max_dim);
  return d;
}

// One dims vector broadcast-compatible with `base` (some dims set to 1 and
// possibly fewer leading dims).
oracle::Dims compatible_dims(std::mt19937& rng, const oracle::Dims& base) {
  size_t drop = static_cast<size_t>(ipick(rng, 0, static_cast<int64_t>(base.size())));
  oracle::Dims d(base.begin() + drop, base.end());
  for (auto& x : d)
    if (ipick(rng, 0, 2) == 0) x = 1;
  if (d.empty()) d = {};  // scalar broadcasts with everything
  return d;
}

}  // namespace

GenProgram random_program(std::mt19937& rng, int max_ops) {
  Builder b{rng};
  int params = static_cast<int>(ipick(rng, 1, 2));
  for (int i = 0; i < params; ++i) {
    oracle::Dims d = random_dims(rng);
    b.pool.emplace_back(b.new_param(d), d);
  }

  int steps = static_cast<int>(ipick(rng, 1, max_ops));
  static const char* unary[] = {"relu", "exp", "tanh", "sigmoid", "negative"};
  static const char* binary[] = {"add", "subtract", "multiply", "max", "min"};

  for (int s = 0; s < steps; ++s) {
    int choice = static_cast<int>(ipick(rng, 0, 9));
    auto [src, dims] = b.pick(rng);
    switch (choice) {
      case 0:
      case 1: {  // unary elementwise
        const char* op = unary[ipick(rng, 0, 4)];
        b.emit(std::string(op) + "(%" + src + ")", dims);
        break;
      }
      case 2:
      case 3: {  // binary broadcast against a fresh compatible parameter
        const char* op = binary[ipick(rng, 0, 4)];
        oracle::Dims other = compatible_dims(rng, dims);
        auto bc = oracle::broadcast(dims, other);
        if (!bc) break;
        std::string rhs = b.new_param(other);
        b.emit(std::string(op) + "(%" + src + ", %" + rhs + ")", *bc);
        break;
      }
      case 4: {  // binary against an existing pool value when compatible
        auto [other, odims] = b.pick(rng);
        auto bc = oracle::broadcast(dims, odims);
        if (!bc) break;
        const char* op = binary[ipick(rng, 0, 4)];
        b.emit(std::string(op) + "(%" + src + ", %" + other + ")", *bc);
        break;
      }
      case 5: {  // dense
        if (dims.size() != 2) break;
        int64_t m = ipick(rng, 1, 4);
        oracle::Dims wdims{m, dims[1]};
        auto out = oracle::dense(dims, wdims);
        if (!out) break;
        std::string w = b.new_param(wdims);
        b.emit("dense(%" + src + ", %" + w + ")", *out);
        break;
      }
      case 6: {  // conv2d
        if (dims.size() != 4) break;
        int64_t kh = ipick(rng, 1, std::min<int64_t>(3, dims[2]));
        int64_t kw = ipick(rng, 1, std::min<int64_t>(3, dims[3]));
        int64_t oc = ipick(rng, 1, 4);
        int64_t sh = ipick(rng, 1, 2), sw = ipick(rng, 1, 2);
        int64_t ph = ipick(rng, 0, 1), pw = ipick(rng, 0, 1);
        oracle::Dims wdims{oc, dims[1], kh, kw};
        auto out = oracle::conv2d_nchw(dims, wdims, sh, sw, ph, pw);
        if (!out) break;
        std::string w = b.new_param(wdims);
        std::ostringstream rhs;
        rhs << "conv2d(%" << src << ", %" << w << ", strides=(" << sh << ", " << sw
            << "), padding=(" << ph << ", " << pw << "))";
        b.emit(rhs.str(), *out);
        break;
      }
      case 7: {  // reduce
        if (dims.empty()) break;
        int64_t axis = ipick(rng, 0, static_cast<int64_t>(dims.size()) - 1);
        bool keep = ipick(rng, 0, 1) == 1;
        const char* op = ipick(rng, 0, 1) ? "sum" : "max_reduce";
        oracle::Dims out = oracle::reduce(dims, {axis}, keep);
        std::ostringstream rhs;
        rhs << op << "(%" << src << ", axis=(" << axis << "), keepdims=" << (keep ? "true" : "false")
            << ")";
        b.emit(rhs.str(), out);
        break;
      }
      case 8: {  // transpose
        if (dims.size() < 2) break;
        std::vector<int64_t> axes(dims.size());
        std::iota(axes.begin(), axes.end(), 0);
        std::shuffle(axes.begin(), axes.end(), rng);
        std::ostringstream rhs;
        rhs << "transpose(%" << src << ", axes=(";
        for (size_t i = 0; i < axes.size(); ++i) rhs << (i ? ", " : "") << axes[i];
        rhs << "))";
        b.emit(rhs.str(), oracle::transpose(dims, axes));
        break;
      }
      case 9: {  // bias_add on rank >= 2
        if (dims.size() < 2) break;
        std::string bias = b.new_param({dims[1]});
        b.emit("bias_add(%" + src + ", %" + bias + ")", oracle::bias_add(dims));
        break;
      }
    }
    // Keep tensors small so interpretation stays fast.
    if (total(b.pool.back().second) > 4096) b.pool.pop_back();
  }

  GenProgram out;
  out.param_names = b.param_names;
  out.param_shapes = b.param_shapes;
  out.result_shape = b.pool.back().second;
  out.op_count = b.op_count;

  std::ostringstream mod;
  mod << "def @main(";
  for (size_t i = 0; i < b.param_names.size(); ++i) {
    if (i) mod << ", ";
    mod << "%" << b.param_names[i] << ": Tensor[" << dims_str(b.param_shapes[i]) << ", float32]";
  }
  mod << ") {\n" << b.body.str() << "  %" << b.pool.back().first << "\n}\n";
  out.text = mod.str();
  return out;
}

oracle::Dag random_dag(std::mt19937& rng, int max_nodes) {
  int n = static_cast<int>(ipick(rng, 3, max_nodes));
  oracle::Dag dag;
  dag.nodes.resize(n);
  for (int i = 0; i < n; ++i) {
    dag.nodes[i].pattern = static_cast<int>(ipick(rng, 0, 5));
    dag.nodes[i].extern_output = ipick(rng, 0, 9) < 2;
    if (i == 0) continue;
    int fan_in = static_cast<int>(ipick(rng, 1, std::min(3, i)));
    std::vector<size_t> producers;
    while (static_cast<int>(producers.size()) < fan_in) {
      size_t p = static_cast<size_t>(ipick(rng, 0, i - 1));
      if (std::find(producers.begin(), producers.end(), p) == producers.end())
        producers.push_back(p);
    }
    for (size_t p : producers) dag.nodes[p].consumers.push_back(static_cast<size_t>(i));
  }
  return dag;
}

std::string dag_to_module(const oracle::Dag& dag) {
  static const char* prefix[] = {"t_ew", "t_bc", "t_inj", "t_red", "t_cof", "t_opq"};
  size_t n = dag.nodes.size();
  std::vector<std::vector<size_t>> producers(n);
  for (size_t i = 0; i < n; ++i)
    for (size_t c : dag.nodes[i].consumers) producers[c].push_back(i);

  std::ostringstream os;
  os << "def @main(%x: Tensor[(4), float32]) {\n";
  for (size_t i = 0; i < n; ++i) {
    std::vector<std::string> args;
    for (size_t p : producers[i]) args.push_back("%n" + std::to_string(p));
    if (args.empty()) args.push_back("%x");
    os << "  let %n" << i << " = " << prefix[dag.nodes[i].pattern] << "_" << args.size() << "(";
    for (size_t k = 0; k < args.size(); ++k) os << (k ? ", " : "") << args[k];
    os << ", tag=" << i << ");\n";
  }
  std::vector<size_t> outs;
  for (size_t i = 0; i < n; ++i)
    if (dag.nodes[i].extern_output || dag.nodes[i].consumers.empty()) outs.push_back(i);
  if (outs.size() == 1) {
    os << "  %n" << outs[0] << "\n";
  } else {
    os << "  (";
    for (size_t k = 0; k < outs.size(); ++k) os << (k ? ", " : "") << "%n" << outs[k];
    os << ")\n";
  }
  os << "}\n";
  return os.str();
}

std::vector<float> random_floats(std::mt19937& rng, int64_t count, float lo, float hi) {
  std::uniform_real_distribution<float> dist(lo, hi);
  std::vector<float> out(static_cast<size_t>(count));
  for (auto& x : out) x = dist(rng);
  return out;
}

}  // namespace testgen
