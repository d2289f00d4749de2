#include "evolvekit/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace evolvekit::expr {

// ---------------------------------------------------------------------------
// Lexer

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    std::size_t i = 0, line = 1, col = 1;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    static const char* const twoChar[] = {"!=", "<=", ">=", "=>", ":="};
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
            while (i < text.size() && text[i] != '\n') advance(1);
            continue;
        }
        SourceLocation where{line, col};
        if (ident_start(c)) {
            std::size_t j = i;
            while (j < text.size() && ident_char(text[j])) ++j;
            out.push_back({TokenKind::Ident, std::string(text.substr(i, j - i)), where});
            advance(j - i);
            continue;
        }
        if (digit(c)) {
            std::size_t j = i;
            while (j < text.size() && digit(text[j])) ++j;
            TokenKind kind = TokenKind::Int;
            if (j + 1 < text.size() && text[j] == '.' && digit(text[j + 1])) {
                kind = TokenKind::Float;
                ++j;
                while (j < text.size() && digit(text[j])) ++j;
            }
            out.push_back({kind, std::string(text.substr(i, j - i)), where});
            advance(j - i);
            continue;
        }
        if (c == '"') {
            std::string value;
            advance(1);
            bool closed = false;
            while (i < text.size()) {
                char d = text[i];
                if (d == '"') {
                    advance(1);
                    closed = true;
                    break;
                }
                if (d == '\n') break;
                if (d == '\\' && i + 1 < text.size()) {
                    char e = text[i + 1];
                    value += e == 'n' ? '\n' : e == 't' ? '\t' : e;
                    advance(2);
                    continue;
                }
                value += d;
                advance(1);
            }
            if (!closed) throw Error(ErrorCode::ParseError, "unterminated string literal", where);
            out.push_back({TokenKind::String, std::move(value), where});
            continue;
        }
        bool matched = false;
        for (const char* sym : twoChar) {
            if (text.substr(i, 2) == sym) {
                out.push_back({TokenKind::Symbol, sym, where});
                advance(2);
                matched = true;
                break;
            }
        }
        if (matched) continue;
        if (std::string_view("().,:=<>{}+-").find(c) != std::string_view::npos) {
            out.push_back({TokenKind::Symbol, std::string(1, c), where});
            advance(1);
            continue;
        }
        throw Error(ErrorCode::ParseError, std::string("unexpected character '") + c + "'", where);
    }
    out.push_back({TokenKind::End, "", SourceLocation{line, col}});
    return out;
}

TokenStream::TokenStream(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::End) tokens_.push_back({});
}

const Token& TokenStream::peek(std::size_t ahead) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
}

const Token& TokenStream::next() {
    const Token& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    return t;
}

bool TokenStream::is_keyword(std::string_view word, std::size_t ahead) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Ident && t.text == word;
}

bool TokenStream::is_symbol(std::string_view sym, std::size_t ahead) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::Symbol && t.text == sym;
}

bool TokenStream::accept_keyword(std::string_view word) {
    if (!is_keyword(word)) return false;
    next();
    return true;
}

bool TokenStream::accept_symbol(std::string_view sym) {
    if (!is_symbol(sym)) return false;
    next();
    return true;
}

namespace {

std::string describe(const Token& t) {
    switch (t.kind) {
    case TokenKind::End: return "end of input";
    case TokenKind::String: return "string \"" + t.text + "\"";
    default: return "'" + t.text + "'";
    }
}

}  // namespace

void TokenStream::fail(const std::string& message) const {
    throw Error(ErrorCode::ParseError, message + ", found " + describe(peek()), peek().where);
}

const Token& TokenStream::expect_ident(std::string_view what) {
    if (peek().kind != TokenKind::Ident) fail("expected " + std::string(what));
    return next();
}

const Token& TokenStream::expect_keyword(std::string_view word) {
    if (!is_keyword(word)) fail("expected '" + std::string(word) + "'");
    return next();
}

const Token& TokenStream::expect_symbol(std::string_view sym) {
    if (!is_symbol(sym)) fail("expected '" + std::string(sym) + "'");
    return next();
}

const Token& TokenStream::expect_string(std::string_view what) {
    if (peek().kind != TokenKind::String) fail("expected " + std::string(what));
    return next();
}

// ---------------------------------------------------------------------------
// Parser

std::string_view to_string(CmpOp op) noexcept {
    switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
    }
    return "?";
}

namespace {

const std::set<std::string, std::less<>> kReserved = {
    "forall", "exists", "in", "and", "or", "implies", "not", "size", "all", "true", "false", "null"};

std::optional<CmpOp> accept_cmp(TokenStream& ts) {
    static const std::pair<const char*, CmpOp> ops[] = {{"=", CmpOp::Eq},  {"!=", CmpOp::Ne},
                                                        {"<", CmpOp::Lt},  {"<=", CmpOp::Le},
                                                        {">", CmpOp::Gt},  {">=", CmpOp::Ge}};
    for (const auto& [sym, op] : ops)
        if (ts.accept_symbol(sym)) return op;
    return std::nullopt;
}

std::int64_t parse_int(const Token& t) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) throw Error(ErrorCode::ParseError, "integer out of range", t.where);
    return v;
}

double parse_float(const Token& t) {
    double v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc()) throw Error(ErrorCode::ParseError, "bad number", t.where);
    return v;
}

class Parser {
public:
    explicit Parser(TokenStream& ts) : ts_(ts) {}

    ExprPtr implies() {
        ExprPtr lhs = disjunction();
        if (ts_.is_keyword("implies")) {
            SourceLocation where = ts_.next().where;
            ExprPtr rhs = implies();
            return make(Binary{Binary::Op::Implies, lhs, rhs}, where);
        }
        return lhs;
    }

private:
    template <typename Node>
    static ExprPtr make(Node node, SourceLocation where) {
        return std::make_shared<const Expr>(Expr{std::move(node), where});
    }

    ExprPtr disjunction() {
        ExprPtr lhs = conjunction();
        while (ts_.is_keyword("or")) {
            SourceLocation where = ts_.next().where;
            lhs = make(Binary{Binary::Op::Or, lhs, conjunction()}, where);
        }
        return lhs;
    }

    ExprPtr conjunction() {
        ExprPtr lhs = unary();
        while (ts_.is_keyword("and")) {
            SourceLocation where = ts_.next().where;
            lhs = make(Binary{Binary::Op::And, lhs, unary()}, where);
        }
        return lhs;
    }

    ExprPtr unary() {
        SourceLocation where = ts_.peek().where;
        if (ts_.accept_keyword("not")) return make(Not{unary()}, where);
        if (ts_.is_keyword("forall") || ts_.is_keyword("exists")) {
            Quantifier q;
            q.universal = ts_.next().text == "forall";
            q.var = variable_name();
            ts_.expect_keyword("in");
            q.coll = collection();
            ts_.expect_symbol(".");
            q.body = implies();
            return make(std::move(q), where);
        }
        if (ts_.accept_symbol("(")) {
            ExprPtr inner = implies();
            ts_.expect_symbol(")");
            return inner;
        }
        return atom();
    }

    std::string variable_name() {
        const Token& t = ts_.expect_ident("a variable name");
        if (kReserved.count(t.text))
            throw Error(ErrorCode::ParseError, "'" + t.text + "' is reserved", t.where);
        return t.text;
    }

    Collection collection() {
        Collection c;
        c.where = ts_.peek().where;
        if (ts_.is_keyword("all") && ts_.is_symbol("(", 1)) {
            ts_.next();
            ts_.next();
            c.kind = Collection::Kind::Extent;
            c.className = ts_.expect_ident("a class name").text;
            ts_.expect_symbol(")");
            return c;
        }
        c.var = variable_name();
        ts_.expect_symbol(".");
        if (ts_.is_keyword("linked") && ts_.is_symbol("(", 1)) {
            ts_.next();
            ts_.next();
            c.kind = Collection::Kind::Linked;
            c.association = ts_.expect_ident("an association name").text;
            ts_.expect_symbol(",");
            c.role = ts_.expect_ident("a role name").text;
            ts_.expect_symbol(")");
            return c;
        }
        c.kind = Collection::Kind::Containment;
        c.role = ts_.expect_ident("a containment role").text;
        return c;
    }

    Term term() {
        Term t;
        const Token& tok = ts_.peek();
        t.where = tok.where;
        if (tok.kind == TokenKind::String) {
            t.kind = Term::Kind::Literal;
            t.value = ts_.next().text;
            return t;
        }
        bool negative = false;
        if (ts_.is_symbol("-") &&
            (ts_.peek(1).kind == TokenKind::Int || ts_.peek(1).kind == TokenKind::Float)) {
            ts_.next();
            negative = true;
        }
        if (ts_.peek().kind == TokenKind::Int) {
            t.kind = Term::Kind::Literal;
            std::int64_t v = parse_int(ts_.next());
            t.value = negative ? -v : v;
            return t;
        }
        if (ts_.peek().kind == TokenKind::Float) {
            t.kind = Term::Kind::Literal;
            double v = parse_float(ts_.next());
            t.value = negative ? -v : v;
            return t;
        }
        if (ts_.is_keyword("true") || ts_.is_keyword("false")) {
            t.kind = Term::Kind::Literal;
            t.value = ts_.next().text == "true";
            return t;
        }
        if (ts_.accept_keyword("null")) {
            t.kind = Term::Kind::Null;
            return t;
        }
        t.var = variable_name();
        if (ts_.is_symbol(".") && ts_.peek(1).kind == TokenKind::Ident) {
            ts_.next();
            t.kind = Term::Kind::Attribute;
            t.attr = ts_.next().text;
        } else {
            t.kind = Term::Kind::Object;
        }
        return t;
    }

    ExprPtr atom() {
        SourceLocation where = ts_.peek().where;
        if (ts_.is_keyword("size") && ts_.is_symbol("(", 1)) {
            ts_.next();
            ts_.next();
            SizeCompare s;
            s.coll = collection();
            ts_.expect_symbol(")");
            auto op = accept_cmp(ts_);
            if (!op) ts_.fail("expected a comparison after size(...)");
            s.op = *op;
            bool negative = ts_.accept_symbol("-");
            if (ts_.peek().kind != TokenKind::Int) ts_.fail("expected an integer bound");
            s.bound = parse_int(ts_.next());
            if (negative) s.bound = -s.bound;
            return make(std::move(s), where);
        }
        if ((ts_.is_keyword("true") || ts_.is_keyword("false"))) {
            const Token& next = ts_.peek(1);
            bool followedByCmp = next.kind == TokenKind::Symbol &&
                                 (next.text == "=" || next.text == "!=" || next.text == "<" ||
                                  next.text == "<=" || next.text == ">" || next.text == ">=");
            if (!followedByCmp) return make(BoolConst{ts_.next().text == "true"}, where);
        }
        if (ts_.peek().kind == TokenKind::End || ts_.peek().kind == TokenKind::Symbol) {
            if (!(ts_.is_symbol("-"))) ts_.fail("expected an expression");
        }
        Compare c;
        c.lhs = term();
        auto op = accept_cmp(ts_);
        if (!op) ts_.fail("expected a comparison operator");
        c.op = *op;
        c.rhs = term();
        return make(std::move(c), where);
    }

    TokenStream& ts_;
};

}  // namespace

ExprPtr parse_expr(TokenStream& ts) { return Parser(ts).implies(); }

ExprPtr parse_expr(std::string_view text) {
    TokenStream ts(tokenize(text));
    ExprPtr e = parse_expr(ts);
    if (!ts.at_end()) ts.fail("unexpected trailing input");
    return e;
}

namespace {

std::string coll_string(const Collection& c) {
    switch (c.kind) {
    case Collection::Kind::Extent: return "all(" + c.className + ")";
    case Collection::Kind::Containment: return c.var + "." + c.role;
    case Collection::Kind::Linked: return c.var + ".linked(" + c.association + ", " + c.role + ")";
    }
    return "?";
}

std::string term_string(const Term& t) {
    switch (t.kind) {
    case Term::Kind::Attribute: return t.var + "." + t.attr;
    case Term::Kind::Object: return t.var;
    case Term::Kind::Literal: return literal_to_string(t.value);
    case Term::Kind::Null: return "null";
    }
    return "?";
}

struct Printer {
    std::string operator()(const Quantifier& q) const {
        return std::string(q.universal ? "forall " : "exists ") + q.var + " in " +
               coll_string(q.coll) + " . " + to_string(*q.body);
    }
    std::string operator()(const Binary& b) const {
        const char* op = b.op == Binary::Op::And ? " and " : b.op == Binary::Op::Or ? " or " : " implies ";
        return "(" + to_string(*b.lhs) + op + to_string(*b.rhs) + ")";
    }
    std::string operator()(const Not& n) const { return "not (" + to_string(*n.operand) + ")"; }
    std::string operator()(const Compare& c) const {
        return term_string(c.lhs) + " " + std::string(to_string(c.op)) + " " + term_string(c.rhs);
    }
    std::string operator()(const SizeCompare& s) const {
        return "size(" + coll_string(s.coll) + ") " + std::string(to_string(s.op)) + " " +
               std::to_string(s.bound);
    }
    std::string operator()(const BoolConst& b) const { return b.value ? "true" : "false"; }
};

}  // namespace

std::string to_string(const Expr& e) { return std::visit(Printer{}, e.node); }

// ---------------------------------------------------------------------------
// Typing

namespace {

/// Static type of a term: an object of some class, a primitive, or null.
struct StaticType {
    enum class Kind { Object, Primitive, Null } kind = Kind::Null;
    std::string className;
    AttrType prim;
};

[[noreturn]] void type_error(const std::string& message, SourceLocation where) {
    throw Error(ErrorCode::TypeError, message, where);
}

class Typer {
public:
    explicit Typer(const Metamodel& mm) : mm_(mm) {}

    void check(const Expr& e, TypeEnv& env) {
        std::visit([&](const auto& node) { check_node(node, e.where, env); }, e.node);
    }

private:
    const std::string& lookup(const TypeEnv& env, const std::string& var, SourceLocation where) {
        auto it = env.find(var);
        if (it == env.end()) type_error("variable '" + var + "' is not bound", where);
        return it->second;
    }

    std::string collection_class(const Collection& c, const TypeEnv& env) {
        switch (c.kind) {
        case Collection::Kind::Extent:
            if (!mm_.find_class(c.className))
                type_error("unknown class '" + c.className + "'", c.where);
            return c.className;
        case Collection::Kind::Containment: {
            const std::string& cls = lookup(env, c.var, c.where);
            const MContainment* k = mm_.find_containment(cls, c.role);
            if (!k) type_error("class '" + cls + "' has no containment role '" + c.role + "'", c.where);
            return k->childClass;
        }
        case Collection::Kind::Linked: {
            const std::string& cls = lookup(env, c.var, c.where);
            const MAssociation* a = mm_.find_association(c.association);
            if (!a) type_error("unknown association '" + c.association + "'", c.where);
            bool asSrc = c.role == a->srcRole;
            if (!asSrc && c.role != a->dstRole)
                type_error("association '" + a->name + "' has no role '" + c.role + "'", c.where);
            const std::string& end = asSrc ? a->srcClass : a->dstClass;
            if (!mm_.is_subtype(cls, end) && !mm_.is_subtype(end, cls))
                type_error("'" + c.var + "' of class '" + cls + "' cannot play role '" + c.role +
                               "' of '" + a->name + "'",
                           c.where);
            return asSrc ? a->dstClass : a->srcClass;
        }
        }
        return {};
    }

    StaticType term_type(const Term& t, const TypeEnv& env) {
        StaticType st;
        switch (t.kind) {
        case Term::Kind::Object:
            st.kind = StaticType::Kind::Object;
            st.className = lookup(env, t.var, t.where);
            return st;
        case Term::Kind::Attribute: {
            const std::string& cls = lookup(env, t.var, t.where);
            const MAttribute* a = mm_.find_attribute(cls, t.attr);
            if (!a) type_error("class '" + cls + "' has no attribute '" + t.attr + "'", t.where);
            st.kind = StaticType::Kind::Primitive;
            st.prim = a->type;
            return st;
        }
        case Term::Kind::Literal:
            st.kind = StaticType::Kind::Primitive;
            st.prim.kind = std::visit(
                [](const auto& v) {
                    using V = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<V, bool>) return PrimitiveKind::Bool;
                    else if constexpr (std::is_same_v<V, std::int64_t>) return PrimitiveKind::Int;
                    else if constexpr (std::is_same_v<V, double>) return PrimitiveKind::Float;
                    else return PrimitiveKind::String;
                },
                t.value);
            return st;
        case Term::Kind::Null: return st;
        }
        return st;
    }

    static bool numeric(PrimitiveKind k) { return k == PrimitiveKind::Int || k == PrimitiveKind::Float; }
    static bool textual(PrimitiveKind k) { return k == PrimitiveKind::String || k == PrimitiveKind::Enum; }

    void check_node(const Quantifier& q, SourceLocation where, TypeEnv& env) {
        std::string cls = collection_class(q.coll, env);
        if (env.count(q.var)) type_error("variable '" + q.var + "' is already bound", where);
        env[q.var] = cls;
        check(*q.body, env);
        env.erase(q.var);
    }
    void check_node(const Binary& b, SourceLocation, TypeEnv& env) {
        check(*b.lhs, env);
        check(*b.rhs, env);
    }
    void check_node(const Not& n, SourceLocation, TypeEnv& env) { check(*n.operand, env); }
    void check_node(const SizeCompare& s, SourceLocation, TypeEnv& env) { collection_class(s.coll, env); }
    void check_node(const BoolConst&, SourceLocation, TypeEnv&) {}

    void check_node(const Compare& c, SourceLocation where, TypeEnv& env) {
        StaticType l = term_type(c.lhs, env), r = term_type(c.rhs, env);
        bool ordering = c.op != CmpOp::Eq && c.op != CmpOp::Ne;
        using K = StaticType::Kind;
        if (l.kind == K::Null || r.kind == K::Null) {
            if (ordering) type_error("null only supports = and !=", where);
            return;
        }
        if (l.kind == K::Object || r.kind == K::Object) {
            if (l.kind != r.kind) type_error("cannot compare an object with a value", where);
            if (ordering) type_error("objects only support = and !=", where);
            return;
        }
        PrimitiveKind lk = l.prim.kind, rk = r.prim.kind;
        bool ok = (numeric(lk) && numeric(rk)) || (textual(lk) && textual(rk)) ||
                  (lk == PrimitiveKind::Bool && rk == PrimitiveKind::Bool);
        if (!ok) type_error("cannot compare " + l.prim.name() + " with " + r.prim.name(), where);
        if (ordering && lk == PrimitiveKind::Bool) type_error("booleans only support = and !=", where);
        // Enum attribute against a string literal: the literal must be one of the values.
        auto checkEnum = [&](const StaticType& e, const Term& other) {
            if (e.prim.kind != PrimitiveKind::Enum || other.kind != Term::Kind::Literal) return;
            const auto& s = std::get<std::string>(other.value);
            const auto& vals = e.prim.enumValues;
            if (std::find(vals.begin(), vals.end(), s) == vals.end())
                type_error("\"" + s + "\" is not a value of " + e.prim.name(), other.where);
        };
        checkEnum(l, c.rhs);
        checkEnum(r, c.lhs);
    }

    const Metamodel& mm_;
};

}  // namespace

void typecheck(const Expr& e, const Metamodel& mm, TypeEnv env) { Typer(mm).check(e, env); }

// ---------------------------------------------------------------------------
// Evaluation

ModelView::ModelView(const Model& model, const Metamodel& mm) : model_(model), mm_(mm) {
    for (const auto& cls : mm_.classes) extents_[cls.name];
    for (const auto& [id, obj] : model_.objects) {
        if (!mm_.find_class(obj.className)) {
            unknown_.push_back(id);
            continue;
        }
        for (const auto& cls : mm_.classes)
            if (mm_.is_subtype(obj.className, cls.name)) extents_[cls.name].push_back(id);
    }
    for (const auto& [id, link] : model_.links) {
        const MAssociation* a = mm_.find_association(link.association);
        if (!a) continue;
        links_[{a->name, a->srcRole, link.src}].push_back(link.dst);
        links_[{a->name, a->dstRole, link.dst}].push_back(link.src);
    }
    for (auto& [key, ends] : links_) {
        std::sort(ends.begin(), ends.end());
        ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    }
}

const std::vector<std::string>& ModelView::extent(const std::string& className) const {
    static const std::vector<std::string> empty;
    auto it = extents_.find(className);
    return it == extents_.end() ? empty : it->second;
}

std::vector<std::string> ModelView::children(const std::string& id, const std::string& role) const {
    const MObject* obj = model_.find(id);
    if (!obj) return {};
    auto it = obj->children.find(role);
    if (it == obj->children.end()) return {};
    std::vector<std::string> out;
    for (const auto& kid : it->second) {
        const MObject* child = model_.find(kid);
        if (child && mm_.find_class(child->className)) out.push_back(kid);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::string> ModelView::linked(const std::string& id, const std::string& assoc,
                                           const std::string& role) const {
    auto it = links_.find({assoc, role, id});
    if (it == links_.end()) return {};
    std::vector<std::string> out;
    for (const auto& other : it->second) {
        const MObject* o = model_.find(other);
        if (o && mm_.find_class(o->className)) out.push_back(other);
    }
    return out;
}

std::optional<Literal> ModelView::attribute(const std::string& id, const std::string& attr) const {
    const MObject* obj = model_.find(id);
    if (!obj) return std::nullopt;
    auto it = obj->attributes.find(attr);
    if (it != obj->attributes.end()) return it->second;
    if (const MAttribute* a = mm_.find_attribute(obj->className, attr)) return a->defaultValue;
    return std::nullopt;
}

namespace {

const std::string* bound(const Bindings& env, const std::string& var) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == var) return &it->second;
    return nullptr;
}

struct Value {
    enum class Kind { Null, Lit, Obj } kind = Kind::Null;
    Literal lit;
    std::string obj;
};

bool apply(CmpOp op, int ordering) {
    switch (op) {
    case CmpOp::Eq: return ordering == 0;
    case CmpOp::Ne: return ordering != 0;
    case CmpOp::Lt: return ordering < 0;
    case CmpOp::Le: return ordering <= 0;
    case CmpOp::Gt: return ordering > 0;
    case CmpOp::Ge: return ordering >= 0;
    }
    return false;
}

template <typename T>
int three_way(const T& a, const T& b) {
    return a < b ? -1 : (b < a ? 1 : 0);
}

/// Equality across incomparable kinds is false, ordering is false, `!=` is true.
bool compare(const Value& l, CmpOp op, const Value& r) {
    auto incomparable = [op] { return op == CmpOp::Ne; };
    if (l.kind != r.kind) return incomparable();
    switch (l.kind) {
    case Value::Kind::Null: return op == CmpOp::Eq;
    case Value::Kind::Obj:
        if (op == CmpOp::Eq) return l.obj == r.obj;
        if (op == CmpOp::Ne) return l.obj != r.obj;
        return false;
    case Value::Kind::Lit: break;
    }
    const Literal& a = l.lit;
    const Literal& b = r.lit;
    auto asDouble = [](const Literal& v) -> std::optional<double> {
        if (auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
        if (auto* d = std::get_if<double>(&v)) return *d;
        return std::nullopt;
    };
    if (auto *ia = std::get_if<std::int64_t>(&a), *ib = std::get_if<std::int64_t>(&b); ia && ib)
        return apply(op, three_way(*ia, *ib));
    if (auto da = asDouble(a), db = asDouble(b); da && db) return apply(op, three_way(*da, *db));
    if (auto *sa = std::get_if<std::string>(&a), *sb = std::get_if<std::string>(&b); sa && sb)
        return apply(op, sa->compare(*sb) < 0 ? -1 : (sa->compare(*sb) > 0 ? 1 : 0));
    if (auto *ba = std::get_if<bool>(&a), *bb = std::get_if<bool>(&b); ba && bb) {
        if (op == CmpOp::Eq) return *ba == *bb;
        if (op == CmpOp::Ne) return *ba != *bb;
        return false;
    }
    return incomparable();
}

}  // namespace

std::vector<std::string> ModelView::collection(const Collection& c, const Bindings& env) const {
    switch (c.kind) {
    case Collection::Kind::Extent: return extent(c.className);
    case Collection::Kind::Containment: {
        const std::string* id = bound(env, c.var);
        return id ? children(*id, c.role) : std::vector<std::string>{};
    }
    case Collection::Kind::Linked: {
        const std::string* id = bound(env, c.var);
        return id ? linked(*id, c.association, c.role) : std::vector<std::string>{};
    }
    }
    return {};
}

bool ModelView::holds(const Expr& e, Bindings& env) const {
    auto termValue = [&](const Term& t) {
        Value v;
        switch (t.kind) {
        case Term::Kind::Null: break;
        case Term::Kind::Literal:
            v.kind = Value::Kind::Lit;
            v.lit = t.value;
            break;
        case Term::Kind::Object:
            if (const std::string* id = bound(env, t.var)) {
                v.kind = Value::Kind::Obj;
                v.obj = *id;
            }
            break;
        case Term::Kind::Attribute:
            if (const std::string* id = bound(env, t.var)) {
                if (auto lit = attribute(*id, t.attr)) {
                    v.kind = Value::Kind::Lit;
                    v.lit = *lit;
                }
            }
            break;
        }
        return v;
    };

    struct Visitor {
        const ModelView& self;
        Bindings& env;
        decltype(termValue)& value;

        bool operator()(const Quantifier& q) const {
            auto items = self.collection(q.coll, env);
            for (const auto& id : items) {
                env.emplace_back(q.var, id);
                bool b = self.holds(*q.body, env);
                env.pop_back();
                if (q.universal && !b) return false;
                if (!q.universal && b) return true;
            }
            return q.universal;
        }
        bool operator()(const Binary& b) const {
            bool l = self.holds(*b.lhs, env);
            switch (b.op) {
            case Binary::Op::And: return l && self.holds(*b.rhs, env);
            case Binary::Op::Or: return l || self.holds(*b.rhs, env);
            case Binary::Op::Implies: return !l || self.holds(*b.rhs, env);
            }
            return false;
        }
        bool operator()(const Not& n) const { return !self.holds(*n.operand, env); }
        bool operator()(const Compare& c) const { return compare(value(c.lhs), c.op, value(c.rhs)); }
        bool operator()(const SizeCompare& s) const {
            auto n = static_cast<std::int64_t>(self.collection(s.coll, env).size());
            return apply(s.op, three_way(n, s.bound));
        }
        bool operator()(const BoolConst& b) const { return b.value; }
    };
    return std::visit(Visitor{*this, env, termValue}, e.node);
}

}  // namespace evolvekit::expr
