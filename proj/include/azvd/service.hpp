#pragma once

#include <azvd/evaluate.hpp>
#include <azvd/layout.hpp>
#include <azvd/store.hpp>

#include <httplib.h>
#include <json.hpp>

#include <exception>
#include <filesystem>
#include <optional>
#include <string>

namespace azvd {

/// A finished HTTP response, independent of the transport.
struct Reply {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

namespace detail {

inline Reply json_reply(int status, const nlohmann::json& j) { return {status, j.dump(), "application/json"}; }

inline Reply error_reply(int status, std::string_view kind, const std::string& message,
                         nlohmann::json extra = nlohmann::json::object()) {
    extra["error"] = kind;
    extra["message"] = message;
    return json_reply(status, extra);
}

inline nlohmann::json document_json(const StoredDocument& d) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : d.doc.pieces()) pieces.push_back(print_canonical(p));
    return {{"id", d.doc.id()}, {"revision", d.revision}, {"pieces", std::move(pieces)}};
}

inline std::string_view type_error_kind(const TypeError& e) {
    if (dynamic_cast<const UnknownRule*>(&e)) return "UnknownRule";
    if (dynamic_cast<const ArityMismatch*>(&e)) return "ArityMismatch";
    if (dynamic_cast<const TypeMismatch*>(&e)) return "TypeMismatch";
    if (dynamic_cast<const UnknownPoint*>(&e)) return "UnknownPoint";
    return "TypeError";
}

/// Maps the library's exceptions onto status codes.
inline Reply reply_for_current_exception() {
    try {
        throw;
    } catch (const UnknownDocument& e) {
        return error_reply(404, "UnknownDocument", e.what());
    } catch (const InvalidPiece& e) {
        return error_reply(404, "InvalidPiece", e.what());
    } catch (const RevisionConflict& e) {
        return error_reply(409, "RevisionConflict", e.what(), {{"revision", e.current()}});
    } catch (const ParseError& e) {
        return error_reply(422, "ParseError", e.what(), {{"offset", e.offset()}});
    } catch (const TypeError& e) {
        return error_reply(422, type_error_kind(e), e.what(), {{"path", e.path().to_string()}});
    } catch (const InvalidPath& e) {
        return error_reply(422, "InvalidPath", e.what());
    } catch (const SlotUnfillable& e) {
        return error_reply(422, "SlotUnfillable", e.what());
    } catch (const NothingToUndo& e) {
        return error_reply(422, "NothingToUndo", e.what());
    } catch (const ScoreError& e) {
        std::string_view kind = dynamic_cast<const TrackCollision*>(&e)         ? "TrackCollision"
                                : dynamic_cast<const NonPositiveDuration*>(&e) ? "NonPositiveDuration"
                                                                               : "EvaluationError";
        nlohmann::json extra = nlohmann::json::object();
        if (e.path()) extra["path"] = e.path()->to_string();
        return error_reply(500, kind, e.what(), std::move(extra));
    } catch (const nlohmann::json::exception& e) {
        return error_reply(400, "BadRequest", e.what());
    } catch (const StoreError& e) {
        return error_reply(500, "StoreError", e.what());
    } catch (const std::exception& e) {
        return error_reply(500, "InternalError", e.what());
    }
}

inline std::string_view element_kind(SceneElement::Kind k) {
    switch (k) {
        case SceneElement::Kind::glyph_run: return "glyph";
        case SceneElement::Kind::line: return "line";
        case SceneElement::Kind::rect: return "rect";
    }
    return "rect";
}

inline nlohmann::json scene_json(const SceneGraph& s) {
    nlohmann::json elements = nlohmann::json::array();
    for (const auto& e : s.elements) {
        nlohmann::json j = {{"kind", element_kind(e.kind)}, {"x", e.x}, {"y", e.y},
                            {"w", e.w},                    {"h", e.h}, {"source", e.source.to_string()}};
        if (e.kind == SceneElement::Kind::glyph_run) j["text"] = to_utf8(e.codepoints);
        if (e.kind == SceneElement::Kind::rect) j["frame"] = e.frame;
        elements.push_back(std::move(j));
    }
    return {{"width", s.width}, {"height", s.height}, {"elements", std::move(elements)}};
}

inline std::size_t piece_index(const std::string& text) {
    try {
        std::size_t used = 0;
        unsigned long long n = std::stoull(text, &used);
        if (used == text.size()) return static_cast<std::size_t>(n);
    } catch (const std::exception&) {
    }
    throw InvalidPiece("bad piece index '" + text + "'");
}

inline constexpr std::string_view kPlaceholderUi = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>azed</title></head>
<body><p>The web editor assets are not installed. Start the server with <code>--ui DIR</code>.</p>
<p>API: <a href="/rules">/rules</a></p></body></html>
)";

}  // namespace detail

/// JSON document API over a DocumentStore. Each handler returns a Reply;
/// `bind` attaches them to an httplib server.
class EditorService {
public:
    explicit EditorService(DocumentStore& store) : store_(store), reg_(store.registry()) {}

    /// Body `{"pieces": [text...]}`. Every line is checked; 422 lists each failure.
    Reply create_document(const std::string& body) {
        try {
            auto req = nlohmann::json::parse(body);
            std::vector<Expression> pieces;
            nlohmann::json errors = nlohmann::json::array();
            std::size_t line = 0;
            for (const auto& item : req.at("pieces")) {
                ++line;
                try {
                    Expression e = parse(item.get<std::string>());
                    type_check(reg_, e);
                    pieces.push_back(std::move(e));
                } catch (const ParseError& e) {
                    errors.push_back({{"line", line}, {"offset", e.offset()}, {"message", e.what()}});
                } catch (const TypeError& e) {
                    errors.push_back({{"line", line},
                                      {"offset", 0},
                                      {"path", e.path().to_string()},
                                      {"message", e.what()}});
                }
            }
            if (!errors.empty())
                return detail::error_reply(422, "InvalidPieces", "document rejected", {{"errors", std::move(errors)}});
            return detail::json_reply(201, detail::document_json(store_.create(std::move(pieces))));
        } catch (...) {
            return detail::reply_for_current_exception();
        }
    }

    Reply get_document(const std::string& id) {
        try {
            return detail::json_reply(200, detail::document_json(store_.get(id)));
        } catch (...) {
            return detail::reply_for_current_exception();
        }
    }

    /// Body `{"revision": n, "replace": text}` or
    /// `{"revision": n, "wrap": {"rule": name, "slot": k}}`.
    Reply patch_node(const std::string& id, const std::string& piece_text, const std::string& path_text,
                     const std::string& body) {
        try {
            auto req = nlohmann::json::parse(body);
            const auto revision = req.at("revision").get<std::uint64_t>();
            const std::size_t piece = detail::piece_index(piece_text);
            const Path path = Path::parse(path_text);
            std::function<Document(const Document&)> edit;
            if (req.contains("replace")) {
                Expression replacement = parse(req.at("replace").get<std::string>());
                edit = [&, replacement](const Document& d) { return edit_replace(reg_, d, piece, path, replacement); };
            } else if (req.contains("wrap")) {
                const auto& w = req.at("wrap");
                std::string rule = w.at("rule").get<std::string>();
                std::size_t slot = w.value("slot", std::size_t{0});
                edit = [&, rule, slot](const Document& d) { return edit_wrap(reg_, d, piece, path, rule, slot); };
            } else {
                return detail::error_reply(400, "BadRequest", "patch needs 'replace' or 'wrap'");
            }
            return detail::json_reply(200, detail::document_json(store_.update(id, revision, edit)));
        } catch (...) {
            return detail::reply_for_current_exception();
        }
    }

    /// Body `{"revision": n}`; reverts the latest edit.
    Reply undo_edit(const std::string& id, const std::string& body) {
        try {
            auto req = nlohmann::json::parse(body);
            const auto revision = req.at("revision").get<std::uint64_t>();
            return detail::json_reply(
                200, detail::document_json(store_.update(id, revision, [](const Document& d) { return undo(d); })));
        } catch (...) {
            return detail::reply_for_current_exception();
        }
    }

    Reply render(const std::string& id, const std::string& piece_text, const std::string& format) {
        try {
            StoredDocument d = store_.get(id);
            const Expression& e = d.doc.piece(detail::piece_index(piece_text));
            if (format == "svg") return {200, to_svg(layout(reg_, e)), "image/svg+xml"};
            if (format == "scene") return detail::json_reply(200, detail::scene_json(layout(reg_, e)));
            if (format == "score") return {200, export_score(evaluate(reg_, e)), "text/plain; charset=utf-8"};
            return detail::error_reply(400, "BadRequest", "format must be svg, scene or score");
        } catch (...) {
            return detail::reply_for_current_exception();
        }
    }

    /// Body `{"pattern": text}`; answers an array of matches.
    Reply run_query(const std::string& id, const std::string& body) {
        try {
            auto req = nlohmann::json::parse(body);
            StoredDocument d = store_.get(id);
            Pattern pat = compile_pattern(req.at("pattern").get<std::string>());
            nlohmann::json out = nlohmann::json::array();
            for (const auto& m : query(d.doc, pat)) {
                nlohmann::json bindings = nlohmann::json::object();
                for (const auto& [name, e] : m.bindings) bindings[name] = print_canonical(e);
                out.push_back({{"piece", m.piece}, {"path", m.path.to_string()}, {"bindings", std::move(bindings)}});
            }
            return detail::json_reply(200, out);
        } catch (...) {
            return detail::reply_for_current_exception();
        }
    }

    /// Rule catalog sorted by name.
    Reply list_rules() {
        nlohmann::json out = nlohmann::json::array();
        for (const auto& [name, rule] : reg_.rules()) {
            nlohmann::json params = nlohmann::json::array();
            for (const auto& p : rule.params) params.push_back(to_string(p.type));
            nlohmann::json entry = {{"name", name}, {"params", std::move(params)}, {"glyph", to_string(rule.glyph.kind)}};
            if (rule.variadic)
                entry["variadic"] = {{"type", to_string(rule.variadic->type)}, {"min", rule.variadic->min}};
            out.push_back(std::move(entry));
        }
        return detail::json_reply(200, out);
    }

    /// Routes every endpoint; `/ui` serves `ui_dir` when given.
    void bind(httplib::Server& server, const std::optional<std::filesystem::path>& ui_dir = std::nullopt) {
        using httplib::Request;
        using httplib::Response;
        auto send = [](Response& res, const Reply& r) {
            res.status = r.status;
            res.set_content(r.body, r.content_type);
        };
        const std::string doc = R"(/documents/([0-9a-f]+))";
        server.Post("/documents", [=, this](const Request& req, Response& res) { send(res, create_document(req.body)); });
        server.Get(doc, [=, this](const Request& req, Response& res) { send(res, get_document(req.matches[1])); });
        server.Patch(doc + R"(/pieces/([^/]+)/node/?([^/]*))", [=, this](const Request& req, Response& res) {
            send(res, patch_node(req.matches[1], req.matches[2], req.matches[3], req.body));
        });
        server.Get(doc + R"(/pieces/([^/]+)/render)", [=, this](const Request& req, Response& res) {
            send(res, render(req.matches[1], req.matches[2], req.get_param_value("format")));
        });
        server.Post(doc + "/query", [=, this](const Request& req, Response& res) {
            send(res, run_query(req.matches[1], req.body));
        });
        server.Post(doc + "/undo", [=, this](const Request& req, Response& res) {
            send(res, undo_edit(req.matches[1], req.body));
        });
        server.Get("/rules", [=, this](const Request&, Response& res) { send(res, list_rules()); });
        if (ui_dir) {
            server.set_mount_point("/ui", ui_dir->string());
        } else {
            server.Get("/ui/?", [](const Request&, Response& res) {
                res.set_content(std::string(detail::kPlaceholderUi), "text/html; charset=utf-8");
            });
        }
        server.set_error_handler([](const Request&, Response& res) {
            if (res.body.empty())
                res.set_content(nlohmann::json{{"error", "NotFound"}, {"message", "no such route"}}.dump(),
                                "application/json");
        });
    }

private:
    DocumentStore& store_;
    const Registry& reg_;
};

}  // namespace azvd
