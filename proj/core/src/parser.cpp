// Copyright (c) the MicroRelay contributors.
// SPDX-License-Identifier: Apache-2.0

#include "microrelay/parser.hpp"

#include <cctype>
#include <cstdlib>

#include "microrelay/analysis.hpp"

namespace microrelay {

namespace {

enum class Tok : uint8_t {
  Ident,
  Int,
  Float,
  Str,
  Punct,  // single char in text[0]
  Arrow,      // ->
  Assign,     // :=
  FatArrow,   // =>
  End,
};

struct Token {
  Tok kind;
  std::string text;
  int64_t int_val = 0;
  double float_val = 0;
  int line = 1, col = 1;
};

class Lexer {
 public:
  Lexer(const std::string& src, std::string file) : src_(src), file_(std::move(file)) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) break;
      out.push_back(next());
    }
    Token end;
    end.kind = Tok::End;
    end.line = line_;
    end.col = col_;
    out.push_back(end);
    return out;
  }

  SourceSpan span_at(const Token& t) const {
    SourceSpan s;
    s.file = file_;
    s.start_line = s.end_line = t.line;
    s.start_col = s.end_col = t.col;
    return s;
  }

 private:
  const std::string& src_;
  std::string file_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;

  char cur() const { return src_[pos_]; }
  char at(size_t off) const { return pos_ + off < src_.size() ? src_[pos_ + off] : '\0'; }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(cur()))) advance();
      if (pos_ + 1 < src_.size() && cur() == '/' && at(1) == '/') {
        while (pos_ < src_.size() && cur() != '\n') advance();
        continue;
      }
      break;
    }
  }

  [[noreturn]] void fail(const std::string& msg) {
    SourceSpan s;
    s.file = file_;
    s.start_line = s.end_line = line_;
    s.start_col = s.end_col = col_;
    diag_throw(DiagCode::SyntaxError, msg, s);
  }

  Token next() {
    Token t;
    t.line = line_;
    t.col = col_;
    char c = cur();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string s;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(cur())) || cur() == '_')) {
        s += cur();
        advance();
      }
      t.kind = Tok::Ident;
      t.text = std::move(s);
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && std::isdigit(static_cast<unsigned char>(at(1))))) {
      return lex_number(t);
    }
    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < src_.size() && cur() != '"') {
        s += cur();
        advance();
      }
      if (pos_ >= src_.size()) fail("unterminated string literal");
      advance();
      t.kind = Tok::Str;
      t.text = std::move(s);
      return t;
    }
    // multi-char punctuation
    if (c == '-' && at(1) == '>') {
      advance();
      advance();
      t.kind = Tok::Arrow;
      t.text = "->";
      return t;
    }
    if (c == ':' && at(1) == '=') {
      advance();
      advance();
      t.kind = Tok::Assign;
      t.text = ":=";
      return t;
    }
    if (c == '=' && at(1) == '>') {
      advance();
      advance();
      t.kind = Tok::FatArrow;
      t.text = "=>";
      return t;
    }
    static const std::string puncts = "()[]{}<>,;:.=!%@?";
    if (puncts.find(c) != std::string::npos) {
      advance();
      t.kind = Tok::Punct;
      t.text = std::string(1, c);
      return t;
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Token lex_number(Token t) {
    std::string s;
    bool is_float = false;
    if (cur() == '-') {
      s += '-';
      advance();
    }
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(cur()))) {
      s += cur();
      advance();
    }
    if (pos_ < src_.size() && cur() == '.' && std::isdigit(static_cast<unsigned char>(at(1)))) {
      is_float = true;
      s += '.';
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(cur()))) {
        s += cur();
        advance();
      }
    }
    if (pos_ < src_.size() && (cur() == 'e' || cur() == 'E')) {
      char sign = at(1);
      if (std::isdigit(static_cast<unsigned char>(sign)) ||
          ((sign == '+' || sign == '-') && std::isdigit(static_cast<unsigned char>(at(2))))) {
        is_float = true;
        s += cur();
        advance();
        if (cur() == '+' || cur() == '-') {
          s += cur();
          advance();
        }
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(cur()))) {
          s += cur();
          advance();
        }
      }
    }
    if (is_float) {
      t.kind = Tok::Float;
      t.float_val = std::strtod(s.c_str(), nullptr);
    } else {
      t.kind = Tok::Int;
      t.int_val = std::strtoll(s.c_str(), nullptr, 10);
    }
    t.text = std::move(s);
    return t;
  }
};

bool is_upper_ident(const std::string& s) {
  return !s.empty() && std::isupper(static_cast<unsigned char>(s[0]));
}

class Parser {
 public:
  Parser(const std::string& text, std::string file, std::shared_ptr<const OpRegistry> registry)
      : lexer_(text, file), file_(std::move(file)) {
    toks_ = lexer_.run();
    module_.registry = registry ? std::move(registry) : builtin_registry();
  }

  void seed_base(const ModuleEnv& base) {
    module_.adts = base.adts;
    module_.globals = base.globals;
    if (base.registry) module_.registry = base.registry;
  }

  ModuleEnv parse_module_text() {
    prescan_metadata();
    while (!at_end()) {
      if (peek_ident("type")) {
        parse_adt();
      } else if (peek_ident("def")) {
        parse_def();
      } else if (peek_ident("metadata")) {
        skip_metadata_section();
      } else {
        fail("expected 'type', 'def', or 'metadata'");
      }
    }
    check_well_formed(module_);
    return std::move(module_);
  }

  ExprRef parse_single_expr() {
    prescan_metadata();
    ExprRef e = parse_block();
    if (!at_end() && !peek_ident("metadata")) fail("trailing input after expression");
    return e;
  }

  std::map<std::string, TensorLiteral> parse_bindings() {
    std::map<std::string, TensorLiteral> out;
    while (!at_end()) {
      expect_punct('%');
      std::string name = expect_ident("variable name");
      expect_punct('=');
      ExprRef e = parse_primary();
      if (e->kind != ExprKind::Constant)
        diag_throw(DiagCode::SyntaxError, "input binding must be a constant", e->span);
      out[name] = e->literal;
      if (peek_punct(';')) next();
    }
    return out;
  }

 private:
  Lexer lexer_;
  std::string file_;
  std::vector<Token> toks_;
  size_t cursor_ = 0;
  ModuleEnv module_;
  std::vector<TensorLiteral> pool_;
  int seq_counter_ = 0;

  // ---- token helpers ----

  const Token& peek(size_t off = 0) const {
    size_t i = cursor_ + off;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() { return toks_[cursor_ < toks_.size() - 1 ? cursor_++ : cursor_]; }
  bool at_end() const { return peek().kind == Tok::End; }

  SourceSpan here() const { return lexer_.span_at(peek()); }

  [[noreturn]] void fail(const std::string& expected) const {
    const Token& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    diag_throw(DiagCode::SyntaxError, "expected " + expected + ", got " + got, lexer_.span_at(t));
  }

  bool peek_punct(char c, size_t off = 0) const {
    const Token& t = peek(off);
    return t.kind == Tok::Punct && t.text[0] == c;
  }
  bool peek_ident(const std::string& s, size_t off = 0) const {
    const Token& t = peek(off);
    return t.kind == Tok::Ident && t.text == s;
  }
  void expect_punct(char c) {
    if (!peek_punct(c)) fail(std::string("'") + c + "'");
    next();
  }
  std::string expect_ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail(what);
    return next().text;
  }
  void expect_ident_kw(const std::string& kw) {
    if (!peek_ident(kw)) fail("'" + kw + "'");
    next();
  }

  // ---- metadata ----

  void prescan_metadata() {
    size_t saved = cursor_;
    int depth = 0;
    for (size_t i = cursor_; i + 1 < toks_.size(); ++i) {
      const Token& t = toks_[i];
      if (t.kind == Tok::Punct && t.text[0] == '{') ++depth;
      if (t.kind == Tok::Punct && t.text[0] == '}') --depth;
      if (depth == 0 && t.kind == Tok::Ident && t.text == "metadata") {
        cursor_ = i;
        parse_metadata_section();
        break;
      }
    }
    cursor_ = saved;
  }

  void parse_metadata_section() {
    expect_ident_kw("metadata");
    expect_punct('{');
    while (!peek_punct('}')) {
      expect_ident_kw("const");
      expect_punct('[');
      if (peek().kind != Tok::Int) fail("constant pool index");
      int64_t index = next().int_val;
      expect_punct(']');
      expect_punct('=');
      TensorLiteral lit = parse_const_tail(here());
      if (index != static_cast<int64_t>(pool_.size()))
        diag_throw(DiagCode::SyntaxError, "constant pool entries must be dense and in order",
                   here());
      pool_.push_back(std::move(lit));
      if (peek_punct(';')) next();
    }
    expect_punct('}');
  }

  void skip_metadata_section() {
    expect_ident_kw("metadata");
    expect_punct('{');
    int depth = 1;
    while (depth > 0 && !at_end()) {
      if (peek_punct('{')) ++depth;
      if (peek_punct('}')) --depth;
      next();
    }
  }

  // ---- declarations ----

  void parse_adt() {
    expect_ident_kw("type");
    AdtDef def;
    def.name = expect_ident("type name");
    if (!is_upper_ident(def.name)) fail("capitalized type name");
    if (peek_punct('[')) {
      next();
      while (!peek_punct(']')) {
        def.type_params.push_back(expect_ident("type parameter"));
        if (peek_punct(',')) next();
      }
      next();
    }
    expect_punct('{');
    while (!peek_punct('}')) {
      AdtConstructor ctor;
      ctor.name = expect_ident("constructor name");
      if (!is_upper_ident(ctor.name)) fail("capitalized constructor name");
      if (peek_punct('(')) {
        next();
        while (!peek_punct(')')) {
          ctor.field_types.push_back(parse_type());
          if (peek_punct(',')) next();
        }
        next();
      }
      def.constructors.push_back(std::move(ctor));
      if (peek_punct(',')) next();
    }
    next();
    if (module_.adts.count(def.name))
      diag_throw(DiagCode::NameCollision, "type " + def.name + " declared twice", here());
    module_.adts[def.name] = std::move(def);
  }

  void parse_def() {
    SourceSpan span = here();
    expect_ident_kw("def");
    expect_punct('@');
    std::string name = expect_ident("global name");
    ExprRef fn = parse_fn_tail(span);
    if (module_.globals.count(name))
      diag_throw(DiagCode::NameCollision, "global @" + name + " defined twice", span);
    module_.globals[name] = fn;
  }

  // Parses <tparams>? (params) [attrs]? (-> ret)? { body } after 'fn'/'def @name'.
  ExprRef parse_fn_tail(SourceSpan span) {
    std::vector<std::string> tparams;
    if (peek_punct('<')) {
      next();
      while (!peek_punct('>')) {
        tparams.push_back(expect_ident("type parameter"));
        if (peek_punct(',')) next();
      }
      next();
    }
    expect_punct('(');
    std::vector<Param> params;
    while (!peek_punct(')')) {
      expect_punct('%');
      Param p;
      p.name = expect_ident("parameter name");
      if (peek_punct(':')) {
        next();
        p.annotation = parse_type();
      }
      params.push_back(std::move(p));
      if (peek_punct(',')) next();
    }
    next();
    AttrMap attrs;
    if (peek_punct('[')) attrs = parse_attr_block();
    TypeRef ret;
    if (peek().kind == Tok::Arrow) {
      next();
      ret = parse_type();
    }
    expect_punct('{');
    ExprRef body = parse_block();
    expect_punct('}');
    return mk_fn(std::move(params), body, ret, std::move(tparams), std::move(attrs), span);
  }

  AttrMap parse_attr_block() {
    AttrMap attrs;
    expect_punct('[');
    while (!peek_punct(']')) {
      std::string key = expect_ident("attribute name");
      expect_punct('=');
      attrs[key] = parse_attr_value();
      if (peek_punct(',')) next();
    }
    next();
    return attrs;
  }

  AttrValue parse_attr_value() {
    if (peek().kind == Tok::Int) return next().int_val;
    if (peek().kind == Tok::Float) return next().float_val;
    if (peek().kind == Tok::Str) return next().text;
    if (peek_ident("true")) {
      next();
      return true;
    }
    if (peek_ident("false")) {
      next();
      return false;
    }
    if (peek_punct('(')) {
      next();
      std::vector<int64_t> xs;
      while (!peek_punct(')')) {
        if (peek().kind != Tok::Int) fail("integer in attribute tuple");
        xs.push_back(next().int_val);
        if (peek_punct(',')) next();
      }
      next();
      return xs;
    }
    fail("attribute value");
  }

  // ---- types ----

  TypeRef parse_type() {
    if (peek_ident("Tensor")) {
      next();
      expect_punct('[');
      Shape shape = parse_shape();
      expect_punct(',');
      BaseType bt = parse_base_type();
      expect_punct(']');
      return tensor_type(std::move(shape), bt);
    }
    if (peek_ident("Ref")) {
      next();
      expect_punct('[');
      TypeRef inner = parse_type();
      expect_punct(']');
      return ref_type(inner);
    }
    if (peek_ident("fn")) {
      next();
      std::vector<std::string> tparams;
      if (peek_punct('<')) {
        next();
        while (!peek_punct('>')) {
          tparams.push_back(expect_ident("type parameter"));
          if (peek_punct(',')) next();
        }
        next();
      }
      expect_punct('(');
      std::vector<TypeRef> args;
      while (!peek_punct(')')) {
        args.push_back(parse_type());
        if (peek_punct(',')) next();
      }
      next();
      if (peek().kind != Tok::Arrow) fail("'->'");
      next();
      TypeRef ret = parse_type();
      std::vector<TypeRelationClause> rels;
      if (peek_ident("where")) {
        next();
        for (;;) {
          TypeRelationClause clause;
          clause.relation = expect_ident("relation name");
          expect_punct('(');
          while (!peek_punct(')')) {
            clause.args.push_back(parse_type());
            if (peek_punct(',')) next();
          }
          next();
          rels.push_back(std::move(clause));
          if (peek_punct(',')) {
            next();
            continue;
          }
          break;
        }
      }
      return func_type(std::move(args), ret, std::move(tparams), std::move(rels));
    }
    if (peek_punct('(')) {
      next();
      std::vector<TypeRef> fields;
      bool trailing_comma = false;
      while (!peek_punct(')')) {
        fields.push_back(parse_type());
        trailing_comma = false;
        if (peek_punct(',')) {
          next();
          trailing_comma = true;
        }
      }
      next();
      if (fields.size() == 1 && !trailing_comma) return fields[0];  // parenthesized type
      return tuple_type(std::move(fields));
    }
    if (peek().kind == Tok::Ident) {
      std::string name = next().text;
      BaseType bt;
      if (try_parse_base_type(name, &bt)) return scalar_type(bt);  // bare base type = scalar
      if (is_upper_ident(name)) {
        if (peek_punct('[')) {
          next();
          std::vector<TypeRef> args;
          while (!peek_punct(']')) {
            args.push_back(parse_type());
            if (peek_punct(',')) next();
          }
          next();
          return type_call(std::move(name), std::move(args));
        }
        return type_name(std::move(name));
      }
      return type_var(std::move(name));
    }
    fail("a type");
  }

  Shape parse_shape() {
    expect_punct('(');
    Shape s;
    while (!peek_punct(')')) {
      s.dims.push_back(parse_dim());
      if (peek_punct(',')) next();
    }
    next();
    return s;
  }

  Dim parse_dim() {
    if (peek().kind == Tok::Int) {
      int64_t v = next().int_val;
      if (v < 0) fail("non-negative dimension");
      return Dim::constant(v);
    }
    if (peek_punct('?')) {
      next();
      return Dim::var(expect_ident("dimension variable name"));
    }
    if (peek_ident("Any")) {
      next();
      return Dim::any();
    }
    fail("a dimension (integer, ?name, or Any)");
  }

  BaseType parse_base_type() {
    std::string name = expect_ident("base type");
    BaseType bt;
    if (!try_parse_base_type(name, &bt)) fail("base type like float32/int8/bool");
    return bt;
  }

  // ---- constants ----

  // After 'const' has been consumed: scalar sugar or (data, shape, dtype).
  TensorLiteral parse_const_tail(const SourceSpan& span) {
    expect_ident_kw("const");
    if (peek().kind == Tok::Int) return TensorLiteral::scalar_i32(next().int_val);
    if (peek().kind == Tok::Float) return TensorLiteral::scalar_f32(static_cast<float>(next().float_val));
    if (peek_ident("true") || peek_ident("false"))
      return TensorLiteral::scalar_bool(next().text == "true");
    expect_punct('(');
    // data
    std::vector<double> values;
    bool saw_float = false;
    parse_const_data(values, &saw_float);
    expect_punct(',');
    Shape shape = parse_shape();
    expect_punct(',');
    BaseType bt = parse_base_type();
    expect_punct(')');

    TensorLiteral lit;
    lit.dtype = bt;
    lit.shape = shape;
    if (bt.is_float() && bt.bits == 64) {
      lit.data = values;
    } else if (bt.is_float()) {
      std::vector<float> f(values.begin(), values.end());
      lit.data = std::move(f);
    } else {
      std::vector<int64_t> xs;
      xs.reserve(values.size());
      for (double v : values) xs.push_back(static_cast<int64_t>(v));
      lit.data = std::move(xs);
    }
    lit.validate(span);
    return lit;
  }

  void parse_const_data(std::vector<double>& out, bool* saw_float) {
    if (peek_punct('[')) {
      next();
      while (!peek_punct(']')) {
        parse_const_data(out, saw_float);
        if (peek_punct(',')) next();
      }
      next();
      return;
    }
    if (peek().kind == Tok::Int) {
      out.push_back(static_cast<double>(next().int_val));
      return;
    }
    if (peek().kind == Tok::Float) {
      *saw_float = true;
      out.push_back(next().float_val);
      return;
    }
    if (peek_ident("true") || peek_ident("false")) {
      out.push_back(next().text == "true" ? 1 : 0);
      return;
    }
    fail("constant data");
  }

  // ---- expressions ----

  // A block is a let/sequence chain ending in an expression.
  ExprRef parse_block() {
    SourceSpan span = here();
    if (peek_ident("let")) {
      next();
      expect_punct('%');
      std::string name = expect_ident("variable name");
      TypeRef ann;
      if (peek_punct(':')) {
        next();
        ann = parse_type();
      }
      expect_punct('=');
      ExprRef value = parse_expr();
      expect_punct(';');
      ExprRef body = parse_block();
      return mk_let(std::move(name), value, body, ann, span);
    }
    // graph let: %g = e; body   (plain let with the same binder)
    if (peek_punct('%') && peek(1).kind == Tok::Ident && peek_punct('=', 2)) {
      next();
      std::string name = next().text;
      next();  // '='
      ExprRef value = parse_expr();
      expect_punct(';');
      ExprRef body = parse_block();
      return mk_let(std::move(name), value, body, nullptr, span);
    }
    ExprRef e = parse_expr();
    if (peek_punct(';')) {
      next();
      ExprRef body = parse_block();
      // e1; e2 is sugar for let %_ = e1; e2
      return mk_let("_" + std::to_string(seq_counter_++), e, body, nullptr, span);
    }
    return e;
  }

  ExprRef parse_expr() {
    ExprRef lhs = parse_postfix();
    if (peek().kind == Tok::Assign) {
      SourceSpan span = here();
      next();
      ExprRef rhs = parse_expr();
      return mk_ref_write(lhs, rhs, span);
    }
    return lhs;
  }

  ExprRef parse_postfix() {
    ExprRef e = parse_primary();
    for (;;) {
      if (peek_punct('(')) {
        e = parse_call(e, {});
        continue;
      }
      if (peek_punct('<') && looks_like_type_args()) {
        next();
        std::vector<TypeRef> targs;
        while (!peek_punct('>')) {
          targs.push_back(parse_type());
          if (peek_punct(',')) next();
        }
        next();
        e = parse_call(e, std::move(targs));
        continue;
      }
      if (peek_punct('.')) {
        SourceSpan span = here();
        next();
        if (peek().kind != Tok::Int) fail("projection index");
        int64_t index = next().int_val;
        e = mk_proj(e, index, span);
        continue;
      }
      break;
    }
    return e;
  }

  // Heuristic: '<' opens type arguments iff a matching '>' appears before
  // any token that cannot occur inside a type-argument list.
  bool looks_like_type_args() const {
    int depth = 0;
    for (size_t i = 0; i + cursor_ < toks_.size(); ++i) {
      const Token& t = peek(i);
      if (t.kind == Tok::Punct) {
        char c = t.text[0];
        if (c == '<') ++depth;
        if (c == '>') {
          --depth;
          if (depth == 0) return peek_punct('(', i + 1);
        }
        if (c == ';' || c == '{' || c == '}') return false;
      }
      if (t.kind == Tok::End || t.kind == Tok::Assign || t.kind == Tok::FatArrow) return false;
    }
    return false;
  }

  ExprRef parse_call(ExprRef callee, std::vector<TypeRef> targs) {
    SourceSpan span = here();
    expect_punct('(');
    std::vector<ExprRef> args;
    AttrMap attrs;
    bool in_attrs = false;
    while (!peek_punct(')')) {
      if (peek().kind == Tok::Ident && peek_punct('=', 1) && !peek_ident("true") &&
          !peek_ident("false")) {
        in_attrs = true;
        std::string key = next().text;
        next();  // '='
        attrs[key] = parse_attr_value();
      } else {
        if (in_attrs) fail("attribute (positional argument after attributes)");
        args.push_back(parse_expr());
      }
      if (peek_punct(',')) next();
    }
    next();
    return mk_call(std::move(callee), std::move(args), std::move(attrs), std::move(targs), span);
  }

  ExprRef parse_primary() {
    SourceSpan span = here();
    if (peek_punct('%')) {
      next();
      return mk_var(expect_ident("variable name"), span);
    }
    if (peek_punct('@')) {
      next();
      return mk_global(expect_ident("global name"), span);
    }
    if (peek_punct('!')) {
      next();
      ExprRef target = parse_postfix();
      return mk_ref_read(target, span);
    }
    if (peek_ident("const")) {
      return mk_const(parse_const_tail(span), span);
    }
    if (peek_ident("meta")) {
      next();
      expect_punct('[');
      std::string section = expect_ident("metadata section name");
      if (section != "Constant") fail("'Constant'");
      expect_punct(']');
      expect_punct('[');
      if (peek().kind != Tok::Int) fail("constant pool index");
      int64_t index = next().int_val;
      expect_punct(']');
      if (index < 0 || index >= static_cast<int64_t>(pool_.size()))
        diag_throw(DiagCode::MetaIndexOutOfRange,
                   "meta[Constant][" + std::to_string(index) + "] with pool size " +
                       std::to_string(pool_.size()),
                   span);
      return mk_const(pool_[index], span);
    }
    if (peek_ident("ref")) {
      next();
      expect_punct('(');
      ExprRef init = parse_expr();
      expect_punct(')');
      return mk_ref_new(init, span);
    }
    if (peek_ident("if")) {
      next();
      expect_punct('(');
      ExprRef cond = parse_expr();
      expect_punct(')');
      expect_punct('{');
      ExprRef then_e = parse_block();
      expect_punct('}');
      expect_ident_kw("else");
      expect_punct('{');
      ExprRef else_e = parse_block();
      expect_punct('}');
      return mk_if(cond, then_e, else_e, span);
    }
    if (peek_ident("match")) {
      next();
      ExprRef scrut = parse_postfix();
      expect_punct('{');
      std::vector<MatchClause> clauses;
      while (!peek_punct('}')) {
        MatchClause clause;
        clause.pattern = parse_pattern();
        if (peek().kind != Tok::FatArrow) fail("'=>'");
        next();
        expect_punct('{');
        clause.body = parse_block();
        expect_punct('}');
        clauses.push_back(std::move(clause));
        if (peek_punct(',')) next();
      }
      next();
      return mk_match(scrut, std::move(clauses), span);
    }
    if (peek_ident("fn")) {
      next();
      return parse_fn_tail(span);
    }
    if (peek_ident("let") || (peek_punct('%') && peek(1).kind == Tok::Ident && peek_punct('=', 2))) {
      return parse_block();
    }
    if (peek_punct('{')) {
      next();
      ExprRef e = parse_block();
      expect_punct('}');
      return e;
    }
    if (peek_punct('(')) {
      next();
      std::vector<ExprRef> fields;
      bool trailing_comma = false;
      while (!peek_punct(')')) {
        fields.push_back(parse_expr());
        trailing_comma = false;
        if (peek_punct(',')) {
          next();
          trailing_comma = true;
        }
      }
      next();
      if (fields.size() == 1 && !trailing_comma) return fields[0];
      return mk_tuple(std::move(fields), span);
    }
    if (peek().kind == Tok::Ident) {
      std::string name = next().text;
      if (is_upper_ident(name)) return mk_ctor(std::move(name), span);
      return mk_op(std::move(name), span);
    }
    fail("an expression");
  }

  PatternRef parse_pattern() {
    SourceSpan span = here();
    if (peek_punct('%')) {
      next();
      return mk_pat_var(expect_ident("pattern variable"), span);
    }
    if (peek_ident("_")) {
      next();
      return mk_pat_wildcard(span);
    }
    if (peek_punct('(')) {
      next();
      std::vector<PatternRef> subs;
      while (!peek_punct(')')) {
        subs.push_back(parse_pattern());
        if (peek_punct(',')) next();
      }
      next();
      return mk_pat_tuple(std::move(subs), span);
    }
    if (peek().kind == Tok::Ident) {
      std::string name = next().text;
      if (!is_upper_ident(name)) fail("a pattern (constructor names are capitalized)");
      std::vector<PatternRef> subs;
      if (peek_punct('(')) {
        next();
        while (!peek_punct(')')) {
          subs.push_back(parse_pattern());
          if (peek_punct(',')) next();
        }
        next();
      }
      return mk_pat_ctor(std::move(name), std::move(subs), span);
    }
    fail("a pattern");
  }
};

}  // namespace

ModuleEnv parse_module(const std::string& text, const std::string& file,
                       std::shared_ptr<const OpRegistry> registry) {
  Parser p(text, file, std::move(registry));
  return p.parse_module_text();
}

ModuleEnv parse_module_with_base(const std::string& text, const std::string& file,
                                 const ModuleEnv& base) {
  Parser p(text, file, base.registry);
  p.seed_base(base);
  return p.parse_module_text();
}

ExprRef parse_expr(const std::string& text, const std::string& file,
                   std::shared_ptr<const OpRegistry> registry) {
  Parser p(text, file, std::move(registry));
  return p.parse_single_expr();
}

std::map<std::string, TensorLiteral> parse_input_bindings(const std::string& text,
                                                          const std::string& file) {
  Parser p(text, file, nullptr);
  return p.parse_bindings();
}

}  // namespace microrelay
