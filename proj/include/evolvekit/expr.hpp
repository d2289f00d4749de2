#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "evolvekit/error.hpp"
#include "evolvekit/metamodel.hpp"
#include "evolvekit/model.hpp"

namespace evolvekit::expr {

// ---------------------------------------------------------------------------
// Tokens

enum class TokenKind { Ident, String, Int, Float, Symbol, End };

struct Token {
    TokenKind kind = TokenKind::End;
    std::string text;  // identifier, symbol, unescaped string, or number spelling
    SourceLocation where;
};

/// Splits constraint and MCL documents. `#` and `//` start line comments.
std::vector<Token> tokenize(std::string_view text);

class TokenStream {
public:
    explicit TokenStream(std::vector<Token> tokens);

    const Token& peek(std::size_t ahead = 0) const;
    const Token& next();
    bool at_end() const { return peek().kind == TokenKind::End; }

    bool is_keyword(std::string_view word, std::size_t ahead = 0) const;
    bool is_symbol(std::string_view sym, std::size_t ahead = 0) const;
    bool accept_keyword(std::string_view word);
    bool accept_symbol(std::string_view sym);

    const Token& expect_ident(std::string_view what);
    const Token& expect_keyword(std::string_view word);
    const Token& expect_symbol(std::string_view sym);
    const Token& expect_string(std::string_view what);

    [[noreturn]] void fail(const std::string& message) const;

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// AST

struct Collection {
    enum class Kind { Extent, Containment, Linked };
    Kind kind = Kind::Extent;
    std::string className;    // Extent
    std::string var;          // Containment / Linked
    std::string role;         // containment role, or the end the variable plays
    std::string association;  // Linked
    SourceLocation where;
};

struct Term {
    enum class Kind { Attribute, Object, Literal, Null };
    Kind kind = Kind::Null;
    std::string var;
    std::string attr;
    Literal value;
    SourceLocation where;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
std::string_view to_string(CmpOp op) noexcept;

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Quantifier {
    bool universal = true;
    std::string var;
    Collection coll;
    ExprPtr body;
};
struct Binary {
    enum class Op { And, Or, Implies };
    Op op = Op::And;
    ExprPtr lhs, rhs;
};
struct Not {
    ExprPtr operand;
};
struct Compare {
    Term lhs;
    CmpOp op = CmpOp::Eq;
    Term rhs;
};
struct SizeCompare {
    Collection coll;
    CmpOp op = CmpOp::Eq;
    std::int64_t bound = 0;
};
struct BoolConst {
    bool value = true;
};

struct Expr {
    std::variant<Quantifier, Binary, Not, Compare, SizeCompare, BoolConst> node;
    SourceLocation where;
};

/// Parses one expression from the stream (quantifier bodies extend as far right
/// as possible; `implies` < `or` < `and` < `not`).
ExprPtr parse_expr(TokenStream& ts);
ExprPtr parse_expr(std::string_view text);

/// Printable form, fully parenthesized. Used for reports and overlap checks.
std::string to_string(const Expr& e);

// ---------------------------------------------------------------------------
// Typing

/// Variable -> static class name.
using TypeEnv = std::map<std::string, std::string>;

/// Throws TYPE_ERROR with the location of the offending node.
void typecheck(const Expr& e, const Metamodel& mm, TypeEnv env);

// ---------------------------------------------------------------------------
// Evaluation

/// Ordered variable -> object id bindings.
using Bindings = std::vector<std::pair<std::string, std::string>>;

/// Read-only index over one model for expression evaluation. Extents are
/// sorted by id and exclude objects whose class the metamodel does not know.
class ModelView {
public:
    ModelView(const Model& model, const Metamodel& mm);

    const Model& model() const { return model_; }
    const Metamodel& metamodel() const { return mm_; }

    const std::vector<std::string>& extent(const std::string& className) const;
    std::vector<std::string> children(const std::string& id, const std::string& role) const;
    /// Objects at the opposite end of `assoc` links in which `id` plays `role`.
    std::vector<std::string> linked(const std::string& id, const std::string& assoc,
                                    const std::string& role) const;
    /// Explicit value, else the metamodel default, else nothing.
    std::optional<Literal> attribute(const std::string& id, const std::string& attr) const;

    std::vector<std::string> collection(const Collection& c, const Bindings& env) const;
    bool holds(const Expr& e, Bindings& env) const;

    /// Objects excluded from extents because their class is unknown.
    const std::vector<std::string>& unknown_objects() const { return unknown_; }

private:
    const Model& model_;
    const Metamodel& mm_;
    std::map<std::string, std::vector<std::string>> extents_;
    // (assoc, role, object) -> opposite ends
    std::map<std::tuple<std::string, std::string, std::string>, std::vector<std::string>> links_;
    std::vector<std::string> unknown_;
};

}  // namespace evolvekit::expr
