// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/printer.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

namespace microrelay {

namespace {

std::string fmt_float(double v, bool is_f32) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), is_f32 ? "%.9g" : "%.17g", v);
  std::string s = buf;
  // Ensure a float literal shape (digit '.' or exponent) so it re-lexes as float.
  if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
      s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
    s += ".0";
  }
  return s;
}

class ModulePrinter {
 public:
  explicit ModulePrinter(bool allow_pool) : allow_pool_(allow_pool) {}

  std::string run(const ModuleEnv& m) {
    for (const auto& [name, def] : m.adts) print_adt(def);
    for (const auto& [name, fn] : m.globals) print_global(name, fn);
    if (!pool_.empty()) {
      os_ << "metadata {\n";
      for (size_t i = 0; i < pool_.size(); ++i) {
        os_ << "  const[" << i << "] = ";
        print_const_body(pool_[i]);
        os_ << ";\n";
      }
      os_ << "}\n";
    }
    return os_.str();
  }

  std::string run_expr(const ExprRef& e) {
    print_expr_at(e, 0);
    return os_.str();
  }

 private:
  bool allow_pool_;
  std::ostringstream os_;
  std::vector<TensorLiteral> pool_;
  static constexpr int64_t kInlineLimit = 16;

  void indent(int n) {
    for (int i = 0; i < n; ++i) os_ << "  ";
  }

  void print_adt(const AdtDef& def) {
    os_ << "type " << def.name;
    if (!def.type_params.empty()) {
      os_ << "[";
      for (size_t i = 0; i < def.type_params.size(); ++i) {
        if (i) os_ << ", ";
        os_ << def.type_params[i];
      }
      os_ << "]";
    }
    os_ << " {\n";
    for (const auto& c : def.constructors) {
      os_ << "  " << c.name;
      if (!c.field_types.empty()) {
        os_ << "(";
        for (size_t i = 0; i < c.field_types.size(); ++i) {
          if (i) os_ << ", ";
          os_ << print_type(c.field_types[i]);
        }
        os_ << ")";
      }
      os_ << ",\n";
    }
    os_ << "}\n\n";
  }

  void print_attrs(const AttrMap& attrs) {
    if (attrs.empty()) return;
    os_ << " [";
    bool first = true;
    for (const auto& [k, v] : attrs) {
      if (!first) os_ << ", ";
      first = false;
      os_ << k << "=" << attr_value_str(v);
    }
    os_ << "]";
  }

  void print_fn_header(const ExprRef& fn) {
    if (!fn->type_params.empty()) {
      os_ << "<";
      for (size_t i = 0; i < fn->type_params.size(); ++i) {
        if (i) os_ << ", ";
        os_ << fn->type_params[i];
      }
      os_ << ">";
    }
    os_ << "(";
    for (size_t i = 0; i < fn->params.size(); ++i) {
      if (i) os_ << ", ";
      os_ << "%" << fn->params[i].name;
      if (fn->params[i].annotation) os_ << ": " << print_type(fn->params[i].annotation);
    }
    os_ << ")";
    print_attrs(fn->attrs);
    if (fn->ret_type) os_ << " -> " << print_type(fn->ret_type);
  }

  void print_global(const std::string& name, const ExprRef& fn) {
    os_ << "def @" << name;
    print_fn_header(fn);
    os_ << " {\n";
    print_block(fn->a, 1);
    os_ << "}\n\n";
  }

  // A block prints a let chain one binding per line, ending in the tail.
  void print_block(const ExprRef& e, int depth) {
    ExprRef cur = e;
    while (cur->kind == ExprKind::Let) {
      indent(depth);
      os_ << "let %" << cur->name;
      if (cur->annotation) os_ << ": " << print_type(cur->annotation);
      os_ << " = ";
      print_expr_at(cur->a, depth);
      os_ << ";\n";
      cur = cur->b;
    }
    indent(depth);
    print_expr_at(cur, depth);
    os_ << "\n";
  }

  void print_data(const TensorLiteral& lit, int64_t& cursor, size_t dim) {
    if (dim == lit.shape.rank()) {
      if (lit.dtype.is_bool()) {
        os_ << (lit.get_int(cursor) ? "true" : "false");
      } else if (lit.dtype.is_float()) {
        os_ << fmt_float(lit.get_double(cursor), lit.dtype.bits == 32);
      } else {
        os_ << lit.get_int(cursor);
      }
      ++cursor;
      return;
    }
    os_ << "[";
    int64_t extent = lit.shape.dims[dim].value;
    for (int64_t i = 0; i < extent; ++i) {
      if (i) os_ << ", ";
      print_data(lit, cursor, dim + 1);
    }
    os_ << "]";
  }

  void print_const_body(const TensorLiteral& lit) {
    os_ << "const(";
    int64_t cursor = 0;
    print_data(lit, cursor, 0);
    os_ << ", " << lit.shape.str() << ", " << lit.dtype.str() << ")";
  }

  void print_constant(const TensorLiteral& lit) {
    if (lit.shape.is_scalar()) {
      if (lit.dtype == BaseType::i32()) {
        os_ << "const " << lit.get_int(0);
        return;
      }
      if (lit.dtype == BaseType::f32()) {
        os_ << "const " << fmt_float(lit.get_double(0), true);
        return;
      }
      if (lit.dtype.is_bool()) {
        os_ << "const " << (lit.get_int(0) ? "true" : "false");
        return;
      }
    }
    if (allow_pool_ && lit.num_elements() > kInlineLimit) {
      pool_.push_back(lit);
      os_ << "meta[Constant][" << pool_.size() - 1 << "]";
      return;
    }
    print_const_body(lit);
  }

  void print_pattern(const PatternRef& p) {
    switch (p->kind) {
      case PatternKind::Wildcard:
        os_ << "_";
        return;
      case PatternKind::Var:
        os_ << "%" << p->name;
        return;
      case PatternKind::Constructor:
        os_ << p->name;
        if (!p->subpats.empty()) {
          os_ << "(";
          for (size_t i = 0; i < p->subpats.size(); ++i) {
            if (i) os_ << ", ";
            print_pattern(p->subpats[i]);
          }
          os_ << ")";
        }
        return;
      case PatternKind::Tuple: {
        os_ << "(";
        for (size_t i = 0; i < p->subpats.size(); ++i) {
          if (i) os_ << ", ";
          print_pattern(p->subpats[i]);
        }
        if (p->subpats.size() == 1) os_ << ",";
        os_ << ")";
        return;
      }
    }
  }

  void print_expr_at(const ExprRef& e, int depth) {
    switch (e->kind) {
      case ExprKind::LocalVar:
        os_ << "%" << e->name;
        return;
      case ExprKind::GlobalVar:
        os_ << "@" << e->name;
        return;
      case ExprKind::OperatorRef:
      case ExprKind::ConstructorRef:
        os_ << e->name;
        return;
      case ExprKind::Constant:
        print_constant(e->literal);
        return;
      case ExprKind::Call: {
        const bool needs_parens = e->a->kind == ExprKind::Function || e->a->kind == ExprKind::If;
        if (needs_parens) os_ << "(";
        print_expr_at(e->a, depth);
        if (needs_parens) os_ << ")";
        if (!e->type_args.empty()) {
          os_ << "<";
          for (size_t i = 0; i < e->type_args.size(); ++i) {
            if (i) os_ << ", ";
            os_ << print_type(e->type_args[i]);
          }
          os_ << ">";
        }
        os_ << "(";
        bool first = true;
        for (const auto& arg : e->elems) {
          if (!first) os_ << ", ";
          first = false;
          print_expr_at(arg, depth);
        }
        for (const auto& [k, v] : e->attrs) {
          if (!first) os_ << ", ";
          first = false;
          os_ << k << "=" << attr_value_str(v);
        }
        os_ << ")";
        return;
      }
      case ExprKind::Let: {
        // A let in value position prints as a braced block.
        os_ << "{\n";
        print_block(e, depth + 1);
        indent(depth);
        os_ << "}";
        return;
      }
      case ExprKind::Function: {
        os_ << "fn";
        print_fn_header(e);
        os_ << " {\n";
        print_block(e->a, depth + 1);
        indent(depth);
        os_ << "}";
        return;
      }
      case ExprKind::Tuple: {
        os_ << "(";
        for (size_t i = 0; i < e->elems.size(); ++i) {
          if (i) os_ << ", ";
          print_expr_at(e->elems[i], depth);
        }
        if (e->elems.size() == 1) os_ << ",";
        os_ << ")";
        return;
      }
      case ExprKind::Projection:
        print_expr_at(e->a, depth);
        os_ << "." << e->index;
        return;
      case ExprKind::If: {
        os_ << "if (";
        print_expr_at(e->a, depth);
        os_ << ") {\n";
        print_block(e->b, depth + 1);
        indent(depth);
        os_ << "} else {\n";
        print_block(e->c, depth + 1);
        indent(depth);
        os_ << "}";
        return;
      }
      case ExprKind::Match: {
        os_ << "match ";
        print_expr_at(e->a, depth);
        os_ << " {\n";
        for (const auto& clause : e->clauses) {
          indent(depth + 1);
          print_pattern(clause.pattern);
          os_ << " => {\n";
          print_block(clause.body, depth + 2);
          indent(depth + 1);
          os_ << "},\n";
        }
        indent(depth);
        os_ << "}";
        return;
      }
      case ExprKind::RefNew:
        os_ << "ref(";
        print_expr_at(e->a, depth);
        os_ << ")";
        return;
      case ExprKind::RefRead:
        os_ << "!";
        print_expr_at(e->a, depth);
        return;
      case ExprKind::RefWrite:
        print_expr_at(e->a, depth);
        os_ << " := ";
        print_expr_at(e->b, depth);
        return;
    }
  }
};

}  // namespace

std::string print_type(const TypeRef& t) { return type_str(t); }

std::string print_module(const ModuleEnv& m) { return ModulePrinter(true).run(m); }

std::string print_expr(const ExprRef& e) { return ModulePrinter(false).run_expr(e); }

namespace {

void print_value_into(std::ostringstream& os, const ValueRef& v) {
  switch (v->kind) {
    case ValueKind::Tensor: {
      const TensorLiteral& lit = v->tensor;
      std::function<void(int64_t&, size_t)> rec = [&](int64_t& cursor, size_t dim) {
        if (dim == lit.shape.rank()) {
          if (lit.dtype.is_bool()) {
            os << (lit.get_int(cursor) ? "true" : "false");
          } else if (lit.dtype.is_float()) {
            os << fmt_float(lit.get_double(cursor), lit.dtype.bits == 32);
          } else {
            os << lit.get_int(cursor);
          }
          ++cursor;
          return;
        }
        os << "[";
        for (int64_t i = 0; i < lit.shape.dims[dim].value; ++i) {
          if (i) os << ", ";
          rec(cursor, dim + 1);
        }
        os << "]";
      };
      int64_t cursor = 0;
      rec(cursor, 0);
      return;
    }
    case ValueKind::Tuple: {
      os << "(";
      for (size_t i = 0; i < v->fields.size(); ++i) {
        if (i) os << ", ";
        print_value_into(os, v->fields[i]);
      }
      if (v->fields.size() == 1) os << ",";
      os << ")";
      return;
    }
    case ValueKind::Adt: {
      os << v->name;
      if (!v->fields.empty()) {
        os << "(";
        for (size_t i = 0; i < v->fields.size(); ++i) {
          if (i) os << ", ";
          print_value_into(os, v->fields[i]);
        }
        os << ")";
      }
      return;
    }
    case ValueKind::Closure:
      os << "<closure>";
      return;
    case ValueKind::OpClosure:
      os << "<op " << v->name << ">";
      return;
    case ValueKind::CtorClosure:
      os << "<constructor " << v->name << ">";
      return;
    case ValueKind::RefCell:
      os << "<ref>";
      return;
  }
}

}  // namespace

std::string print_value(const ValueRef& v) {
  std::ostringstream os;
  print_value_into(os, v);
  return os.str();
}

}  // namespace microrelay
