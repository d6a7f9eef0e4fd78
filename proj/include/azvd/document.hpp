#pragma once

#include <azvd/pattern.hpp>
#include <azvd/registry.hpp>

#include <span>
#include <string>
#include <vector>

namespace azvd {

class InvalidPiece : public Error {
public:
    using Error::Error;
};

class SlotUnfillable : public Error {
public:
    using Error::Error;
};

class NothingToUndo : public Error {
public:
    NothingToUndo() : Error("nothing to undo") {}
};

/// Inverse of one applied edit: the subtree that used to sit at `path`.
struct EditRecord {
    std::size_t piece = 0;
    Path path;
    Expression previous;

    friend bool operator==(const EditRecord&, const EditRecord&) = default;
};

/// A named sequence of top-level expressions plus the undo log.
/// Every piece type-checks against the registry it was built with.
class Document {
public:
    static constexpr std::size_t kHistoryLimit = 1000;

    Document() = default;
    Document(std::string id, std::vector<Expression> pieces, std::vector<EditRecord> history = {})
        : id_(std::move(id)), pieces_(std::move(pieces)), history_(std::move(history)) {}

    /// Builds a document after checking every piece; throws the first TypeError.
    static Document create(const Registry& reg, std::string id, std::vector<Expression> pieces) {
        for (const auto& p : pieces) type_check(reg, p);
        return Document(std::move(id), std::move(pieces));
    }

    const std::string& id() const { return id_; }
    const std::vector<Expression>& pieces() const { return pieces_; }
    const Expression& piece(std::size_t i) const {
        if (i >= pieces_.size())
            throw InvalidPiece("piece " + std::to_string(i) + " out of range (document has " +
                               std::to_string(pieces_.size()) + ")");
        return pieces_[i];
    }
    const std::vector<EditRecord>& history() const { return history_; }

    friend bool operator==(const Document&, const Document&) = default;

private:
    friend Document apply_edit(const Registry&, const Document&, std::size_t, const Path&, const Expression&);
    friend Document undo(const Document&);

    std::string id_;
    std::vector<Expression> pieces_;
    std::vector<EditRecord> history_;
};

/// Replaces the subtree at (piece, path) after checking the result; the
/// input document is never modified.
inline Document apply_edit(const Registry& reg, const Document& doc, std::size_t piece, const Path& path,
                           const Expression& replacement) {
    const Expression& root = doc.piece(piece);
    Expression previous = node_at(root, path);
    Expression edited = replace_at(root, path, replacement);
    type_check(reg, edited);

    Document out = doc;
    out.pieces_[piece] = std::move(edited);
    out.history_.push_back({piece, path, std::move(previous)});
    if (out.history_.size() > Document::kHistoryLimit)
        out.history_.erase(out.history_.begin(), out.history_.end() - Document::kHistoryLimit);
    return out;
}

inline Document edit_replace(const Registry& reg, const Document& doc, std::size_t piece, const Path& path,
                             const Expression& replacement) {
    return apply_edit(reg, doc, piece, path, replacement);
}

/// Wraps the subtree at (piece, path) in `rule`, placing it at argument
/// `slot`. The other arguments come from the rule's declared placeholders.
inline Document edit_wrap(const Registry& reg, const Document& doc, std::size_t piece, const Path& path,
                          const std::string& rule_name, std::size_t slot) {
    const Expression& target = node_at(doc.piece(piece), path);
    const RuleDef* rule = reg.find(rule_name);
    if (!rule) throw UnknownRule("unknown rule '" + rule_name + "'", path);

    const std::size_t arity = rule->variadic ? std::max(rule->min_arity(), slot + 1) : rule->params.size();
    if (slot >= arity)
        throw SlotUnfillable("'" + rule_name + "' has no argument slot " + std::to_string(slot));

    const ParamType want = *rule->slot_type(slot);
    const ParamType got = type_check(reg, target);
    if (got != want)
        throw TypeMismatch("slot " + std::to_string(slot) + " of '" + rule_name + "' takes " +
                               std::string(to_string(want)) + ", not " + std::string(to_string(got)),
                           path);

    std::vector<Expression> args;
    for (std::size_t i = 0; i < arity; ++i) {
        if (i == slot) {
            args.push_back(target);
            continue;
        }
        if (i < rule->params.size() && rule->params[i].placeholder) {
            args.push_back(*rule->params[i].placeholder);
            continue;
        }
        throw SlotUnfillable("no placeholder for argument " + std::to_string(i) + " of '" + rule_name + "'");
    }
    return apply_edit(reg, doc, piece, path, Expression::rule(rule_name, std::move(args)));
}

/// Reverts the most recent edit.
inline Document undo(const Document& doc) {
    if (doc.history_.empty()) throw NothingToUndo();
    Document out = doc;
    const EditRecord& last = out.history_.back();
    out.pieces_[last.piece] = replace_at(out.pieces_[last.piece], last.path, last.previous);
    out.history_.pop_back();
    return out;
}

// ---------------------------------------------------------------------------
// Structural search

struct Match {
    std::size_t piece = 0;
    Path path;
    Bindings bindings;

    friend bool operator==(const Match&, const Match&) = default;
};

/// Every match, pieces in order, pre-order within a piece.
inline std::vector<Match> query(std::span<const Expression> pieces, const Pattern& pat) {
    std::vector<Match> out;
    for (std::size_t i = 0; i < pieces.size(); ++i)
        for_each_preorder(pieces[i], [&](const Path& at, const Expression& node) {
            if (auto b = match(pat, node)) out.push_back({i, at, std::move(*b)});
        });
    return out;
}

inline std::vector<Match> query(const Document& doc, const Pattern& pat) { return query(doc.pieces(), pat); }

}  // namespace azvd
