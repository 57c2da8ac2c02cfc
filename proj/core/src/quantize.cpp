// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0
//
// The annotate / calibrate / realize quantization flow. simulated_quantize
// computes in the wide type; calibration sweeps a single global power-of-two
// scale until no site overflows; realization expands each site into
// multiply/round/clip/cast arithmetic with integer accumulation and a
// compensating rescale on quantized-operator outputs.

#include "microrelay/quantize.hpp"

#include <cmath>
#include <functional>

#include "microrelay/interp.hpp"
#include "microrelay/registry.hpp"

namespace microrelay {

float simq_scalar(float x, int64_t bits, int64_t sign, float scale) {
  const float two_pow = static_cast<float>(std::ldexp(1.0, static_cast<int>(bits - sign)));
  const float lo = sign ? -static_cast<float>(std::ldexp(1.0, static_cast<int>(bits - 1))) : 0.0f;
  const float hi = sign ? static_cast<float>(std::ldexp(1.0, static_cast<int>(bits - 1))) - 1.0f
                        : static_cast<float>(std::ldexp(1.0, static_cast<int>(bits))) - 1.0f;
  float t = x / scale * two_pow;
  float c = std::min(std::max(std::nearbyintf(t), lo), hi);
  return c * scale / two_pow;
}

int64_t quantize_scalar(float x, int64_t bits, int64_t sign, float scale) {
  const float two_pow = static_cast<float>(std::ldexp(1.0, static_cast<int>(bits - sign)));
  const float lo = sign ? -static_cast<float>(std::ldexp(1.0, static_cast<int>(bits - 1))) : 0.0f;
  const float hi = sign ? static_cast<float>(std::ldexp(1.0, static_cast<int>(bits - 1))) - 1.0f
                        : static_cast<float>(std::ldexp(1.0, static_cast<int>(bits))) - 1.0f;
  float t = x / scale * two_pow;
  float c = std::min(std::max(std::nearbyintf(t), lo), hi);
  return static_cast<int64_t>(c);
}

QuantRules QuantRules::defaults() {
  QuantRules rules;
  rules.per_op["conv2d"] = Rule::QuantizeInputs;
  rules.per_op["dense"] = Rule::QuantizeInputs;
  rules.has_default = true;
  rules.default_rule = Rule::PassThrough;
  return rules;
}

QuantRules::Rule QuantRules::lookup(const std::string& op, const SourceSpan& span) const {
  auto it = per_op.find(op);
  if (it != per_op.end()) return it->second;
  if (has_default) return default_rule;
  diag_throw(DiagCode::MissingRule, "no quantization rule for operator " + op, span);
}

namespace {

bool is_simq_call(const ExprRef& e) {
  return e->kind == ExprKind::Call && e->a->kind == ExprKind::OperatorRef &&
         e->a->name == "simulated_quantize";
}

template <typename Fn>
ExprRef rewrite_calls(const ExprRef& e, Fn&& on_call) {
  if (!e) return e;
  auto rec = [&](const ExprRef& x) { return rewrite_calls(x, on_call); };
  switch (e->kind) {
    case ExprKind::LocalVar:
    case ExprKind::GlobalVar:
    case ExprKind::Constant:
    case ExprKind::OperatorRef:
    case ExprKind::ConstructorRef:
      return e;
    default: {
      auto copy = std::make_shared<Expr>(*e);
      copy->checked_type = nullptr;
      if (e->a) copy->a = rec(e->a);
      if (e->b) copy->b = rec(e->b);
      if (e->c) copy->c = rec(e->c);
      copy->elems.clear();
      for (const auto& x : e->elems) copy->elems.push_back(rec(x));
      copy->clauses.clear();
      for (const auto& clause : e->clauses) copy->clauses.push_back({clause.pattern, rec(clause.body)});
      if (copy->kind == ExprKind::Call) return on_call(std::static_pointer_cast<const Expr>(copy));
      return copy;
    }
  }
}

}  // namespace

ModuleEnv quant_annotate(const ModuleEnv& m, const QuantRules& rules, const QuantConfig& cfg) {
  ModuleEnv out = m;
  for (auto& [name, fn] : out.globals) {
    fn = rewrite_calls(fn, [&](const ExprRef& call) -> ExprRef {
      if (call->a->kind != ExprKind::OperatorRef) return call;
      if (rules.lookup(call->a->name, call->span) != QuantRules::Rule::QuantizeInputs) return call;
      auto copy = std::make_shared<Expr>(*call);
      for (auto& arg : copy->elems) {
        if (is_simq_call(arg)) continue;  // already annotated
        AttrMap attrs;
        attrs["bits"] = cfg.bits;
        attrs["sign"] = cfg.sign;
        arg = mk_opcall("simulated_quantize", {arg}, std::move(attrs), call->span);
      }
      return copy;
    });
  }
  return out;
}

namespace {

int count_simq_sites(const ExprRef& e) {
  if (!e) return 0;
  int n = is_simq_call(e) ? 1 : 0;
  n += count_simq_sites(e->a) + count_simq_sites(e->b) + count_simq_sites(e->c);
  for (const auto& x : e->elems) n += count_simq_sites(x);
  for (const auto& clause : e->clauses) n += count_simq_sites(clause.body);
  return n;
}

ModuleEnv with_global_scale(const ModuleEnv& m, double scale) {
  ModuleEnv out = m;
  for (auto& [name, fn] : out.globals) {
    fn = rewrite_calls(fn, [&](const ExprRef& call) -> ExprRef {
      if (!is_simq_call(call)) return call;
      auto copy = std::make_shared<Expr>(*call);
      copy->attrs["scale"] = scale;
      return copy;
    });
  }
  return out;
}

}  // namespace

ModuleEnv quant_calibrate(const ModuleEnv& m,
                          const std::vector<std::vector<ValueRef>>& calibration_inputs,
                          const std::string& entry) {
  int sites = 0;
  for (const auto& [name, fn] : m.globals) sites += count_simq_sites(fn);
  if (sites == 0) return m;
  if (calibration_inputs.empty())
    diag_throw(DiagCode::CalibrationFailed, "calibration requires a non-empty input set");

  for (int k = -16; k <= 16; ++k) {
    double scale = std::ldexp(1.0, k);
    ModuleEnv trial = with_global_scale(m, scale);
    bool overflow = false;
    InterpOptions opts;
    opts.simq_observer = [&](const TensorLiteral& x, const AttrMap& attrs) {
      if (overflow) return;
      int64_t bits = attr_int_or(attrs, "bits", 8);
      int64_t sign = attr_int_or(attrs, "sign", 1);
      double rho = attr_float_opt(attrs, "scale").value_or(scale);
      double two_pow = std::ldexp(1.0, static_cast<int>(bits - sign));
      double limit = sign ? std::ldexp(1.0, static_cast<int>(bits - 1))
                          : std::ldexp(1.0, static_cast<int>(bits));
      int64_t n = x.num_elements();
      for (int64_t i = 0; i < n; ++i) {
        double q = std::nearbyint(x.get_double(i) / rho * two_pow);
        if (sign ? std::abs(q) > limit : (q < 0 || q > limit)) {
          overflow = true;
          return;
        }
      }
    };
    for (const auto& args : calibration_inputs) {
      interp(trial, entry, args, opts);
      if (overflow) break;
    }
    if (!overflow) return trial;
  }
  diag_throw(DiagCode::CalibrationFailed,
             "no power-of-two scale in [2^-16, 2^16] avoids overflow");
}

namespace {

ExprRef realize_site(const ExprRef& simq, const QuantConfig& cfg) {
  // Q(x) = cast(clip(round(x * 2^(bits-sign)/scale)), qtype)
  int64_t bits = attr_int_or(simq->attrs, "bits", cfg.bits);
  int64_t sign = attr_int_or(simq->attrs, "sign", cfg.sign);
  auto scale = attr_float_opt(simq->attrs, "scale");
  if (!scale)
    diag_throw(DiagCode::Uncalibrated, "simulated_quantize site has no calibrated scale",
               simq->span);
  double two_pow = std::ldexp(1.0, static_cast<int>(bits - sign));
  double lo = sign ? -std::ldexp(1.0, static_cast<int>(bits - 1)) : 0.0;
  double hi = sign ? std::ldexp(1.0, static_cast<int>(bits - 1)) - 1
                   : std::ldexp(1.0, static_cast<int>(bits)) - 1;
  const SourceSpan& span = simq->span;
  ExprRef x = simq->elems[0];
  ExprRef mul =
      mk_opcall("multiply", {x, mk_const_f32(static_cast<float>(two_pow / *scale))}, {}, span);
  ExprRef rnd = mk_opcall("round", {mul}, {}, span);
  ExprRef clp = mk_opcall("clip", {rnd}, {{"a_min", lo}, {"a_max", hi}}, span);
  std::string qtype = (sign ? BaseType::i8() : BaseType::u8()).str();
  return mk_opcall("cast", {clp}, {{"dtype", qtype}}, span);
}

double site_scale_ratio(const ExprRef& simq, const QuantConfig& cfg) {
  int64_t bits = attr_int_or(simq->attrs, "bits", cfg.bits);
  int64_t sign = attr_int_or(simq->attrs, "sign", cfg.sign);
  double scale = attr_float_opt(simq->attrs, "scale").value_or(1.0);
  return scale / std::ldexp(1.0, static_cast<int>(bits - sign));
}

}  // namespace

ModuleEnv quant_realize(const ModuleEnv& m, const QuantConfig& cfg) {
  ModuleEnv out = m;
  const std::string accum = cfg.accum.str();
  for (auto& [name, fn] : out.globals) {
    fn = rewrite_calls(fn, [&](const ExprRef& call) -> ExprRef {
      if (call->a->kind != ExprKind::OperatorRef) return call;
      const std::string& op = call->a->name;
      // A quantized contraction: run on integer codes in the accumulation
      // type, then rescale the output back to the wide type.
      if ((op == "dense" || op == "conv2d") && call->elems.size() == 2 &&
          is_simq_call(call->elems[0]) && is_simq_call(call->elems[1])) {
        const ExprRef& qa = call->elems[0];
        const ExprRef& qb = call->elems[1];
        double ratio = site_scale_ratio(qa, cfg) * site_scale_ratio(qb, cfg);
        ExprRef ca = mk_opcall("cast", {realize_site(qa, cfg)}, {{"dtype", accum}}, call->span);
        ExprRef cb = mk_opcall("cast", {realize_site(qb, cfg)}, {{"dtype", accum}}, call->span);
        ExprRef acc = mk_call(call->a, {ca, cb}, call->attrs, call->type_args, call->span);
        ExprRef wide = mk_opcall("cast", {acc}, {{"dtype", "float32"}}, call->span);
        return mk_opcall("multiply", {wide, mk_const_f32(static_cast<float>(ratio))}, {},
                         call->span);
      }
      if (is_simq_call(call)) {
        // Standalone site: quantize then dequantize in the wide type.
        double ratio = site_scale_ratio(call, cfg);
        ExprRef wide =
            mk_opcall("cast", {realize_site(call, cfg)}, {{"dtype", "float32"}}, call->span);
        return mk_opcall("multiply", {wide, mk_const_f32(static_cast<float>(ratio))}, {},
                         call->span);
      }
      return call;
    });
  }
  return out;
}

}  // namespace microrelay
