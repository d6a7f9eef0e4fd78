// azed: batch front end for AZee documents.

#include <azvd/azvd.hpp>
#include <azvd/service.hpp>

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace azvd;

enum Exit { kOk = 0, kInput = 1, kEval = 2, kIo = 3 };

// Failure that already carries its exit status and diagnostic text.
struct Fail {
    Exit code;
    std::string message;
};

struct Line {
    std::size_t number;  // 1-based
    std::string text;
    Expression expr;
};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Fail{kIo, path + ": cannot read file"};
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw Fail{kIo, path + ": read error"};
    return ss.str();
}

const Registry* g_registry = nullptr;

/// Parses and checks every non-blank line; reports each failure and
/// returns whether the file was clean.
bool load_pieces(const std::string& path, std::vector<Line>& out) {
    const std::string text = read_text(path);
    std::istringstream lines(text);
    std::string raw;
    bool ok = true;
    for (std::size_t number = 1; std::getline(lines, raw); ++number) {
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            Expression e = parse(raw);
            type_check(*g_registry, e);
            out.push_back({number, raw, std::move(e)});
        } catch (const ParseError& e) {
            std::cerr << path << ':' << number << ':' << e.offset() << ": " << e.reason() << '\n';
            ok = false;
        } catch (const TypeError& e) {
            std::cerr << path << ':' << number << ':' << source_offset(raw, e.path()) << ": " << e.what() << '\n';
            ok = false;
        }
    }
    return ok;
}

std::vector<Line> load_or_fail(const std::string& path) {
    std::vector<Line> pieces;
    if (!load_pieces(path, pieces)) throw Fail{kInput, {}};
    return pieces;
}

const Line& pick(const std::vector<Line>& pieces, const std::string& path, std::size_t n) {
    if (n >= pieces.size())
        throw Fail{kInput, path + ": piece " + std::to_string(n) + " out of range (file has " +
                               std::to_string(pieces.size()) + ")"};
    return pieces[n];
}

void write_output(const std::string& out_path, const std::string& data) {
    if (out_path.empty() || out_path == "-") {
        std::cout << data << std::flush;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    out << data;
    out.close();
    if (!out) throw Fail{kIo, out_path + ": cannot write file"};
}

int cmd_check(const std::vector<std::string>& files) {
    Exit worst = kOk;
    for (const auto& f : files) {
        try {
            std::vector<Line> pieces;
            if (!load_pieces(f, pieces)) worst = std::max(worst, kInput);
        } catch (const Fail& e) {
            std::cerr << e.message << '\n';
            worst = std::max(worst, e.code);
        }
    }
    return worst;
}

int cmd_render(const std::string& file, std::size_t piece, const std::string& out) {
    auto pieces = load_or_fail(file);
    write_output(out, to_svg(layout(*g_registry, pick(pieces, file, piece).expr)));
    return kOk;
}

int cmd_score(const std::string& file, std::size_t piece) {
    auto pieces = load_or_fail(file);
    const Line& line = pick(pieces, file, piece);
    try {
        std::cout << export_score(evaluate(*g_registry, line.expr)) << std::flush;
    } catch (const ScoreError& e) {
        std::ostringstream msg;
        msg << file << ':' << line.number << ':' << (e.path() ? source_offset(line.text, *e.path()) : 0) << ": "
            << e.what();
        if (e.path()) msg << " (at path \"" << e.path()->to_string() << "\")";
        throw Fail{kEval, msg.str()};
    }
    return kOk;
}

int cmd_query(const std::string& file, const std::string& pattern_text) {
    Pattern pattern;
    try {
        pattern = compile_pattern(pattern_text);
    } catch (const ParseError& e) {
        throw Fail{kInput, "pattern:1:" + std::to_string(e.offset()) + ": " + e.reason()};
    }
    auto pieces = load_or_fail(file);
    std::vector<Expression> exprs;
    for (const auto& l : pieces) exprs.push_back(l.expr);
    for (const auto& m : query(exprs, pattern)) std::cout << m.piece << ':' << m.path.to_string() << '\n';
    std::cout << std::flush;
    return kOk;
}

int cmd_registry_check(const std::string& file) {
    const std::string text = read_text(file);
    try {
        Registry reg = load_registry(text);
        std::cerr << file << ": " << reg.rules().size() << " rules, " << reg.points().size() << " points, "
                  << reg.templates().size() << " templates\n";
    } catch (const RegistryError& e) {
        throw Fail{kInput, file + ':' + std::to_string(e.line()) + ":0: " + e.reason()};
    }
    return kOk;
}

httplib::Server* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const std::string& store_dir, const std::string& listen, const std::string& ui_dir) {
    const auto colon = listen.rfind(':');
    if (colon == std::string::npos) throw Fail{kInput, "--listen expects host:port, got '" + listen + "'"};
    const std::string host = listen.substr(0, colon);
    int port = 0;
    try {
        port = std::stoi(listen.substr(colon + 1));
    } catch (const std::exception&) {
        throw Fail{kInput, "bad port in '" + listen + "'"};
    }

    std::unique_ptr<DocumentStore> store;
    try {
        store = std::make_unique<DocumentStore>(store_dir, *g_registry);
    } catch (const StoreError& e) {
        throw Fail{kIo, e.what()};
    }
    EditorService service(*store);
    httplib::Server server;
    std::optional<std::filesystem::path> ui;
    if (!ui_dir.empty()) ui = ui_dir;
    service.bind(server, ui);

    if (port == 0) {
        port = server.bind_to_any_port(host);
        if (port < 0) throw Fail{kIo, "cannot bind " + host};
    } else if (!server.bind_to_port(host, port)) {
        throw Fail{kIo, "cannot bind " + listen};
    }
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "http://" << host << ':' << port << "/" << std::endl;
    const bool ok = server.listen_after_bind();
    g_server = nullptr;
    return ok ? kOk : kIo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AZee document tool: check, render, score, query and serve AZee expressions"};
    app.require_subcommand(1);
    std::string registry_file;
    app.add_option("--registry", registry_file, "Production-rule registry (default: the built-in rules)");

    std::vector<std::string> check_files;
    auto* check = app.add_subcommand("check", "Parse and type-check every line of each file");
    check->add_option("files", check_files)->required();

    std::string file, out, pattern_text, store_dir = "azed-store", listen = "127.0.0.1:8080", ui_dir;
    std::size_t piece = 0;
    auto* render = app.add_subcommand("render", "Write the SVG of one piece");
    render->add_option("file", file)->required();
    render->add_option("--piece", piece, "Piece index (0-based)");
    render->add_option("--out", out, "Output path (default: standard output)");

    auto* score = app.add_subcommand("score", "Print the signing score of one piece");
    score->add_option("file", file)->required();
    score->add_option("--piece", piece, "Piece index (0-based)");

    auto* query_cmd = app.add_subcommand("query", "Print piece:path for every match of a pattern");
    query_cmd->add_option("file", file)->required();
    query_cmd->add_option("pattern", pattern_text)->required();

    auto* registry_check = app.add_subcommand("registry-check", "Validate a registry file");
    registry_check->add_option("file", file)->required();

    auto* serve = app.add_subcommand("serve", "Run the HTTP document service");
    serve->add_option("--store", store_dir, "Document store directory");
    serve->add_option("--listen", listen, "Address to listen on (host:port, port 0 picks one)");
    serve->add_option("--ui", ui_dir, "Directory of web editor assets served under /ui");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kInput;
    }

    try {
        Registry custom;
        if (!registry_file.empty()) {
            try {
                custom = load_registry(read_text(registry_file));
            } catch (const RegistryError& e) {
                throw Fail{kInput, registry_file + ':' + std::to_string(e.line()) + ":0: " + e.reason()};
            }
            g_registry = &custom;
        } else {
            g_registry = &default_registry();
        }

        if (*check) return cmd_check(check_files);
        if (*render) return cmd_render(file, piece, out);
        if (*score) return cmd_score(file, piece);
        if (*query_cmd) return cmd_query(file, pattern_text);
        if (*registry_check) return cmd_registry_check(file);
        if (*serve) return cmd_serve(store_dir, listen, ui_dir);
    } catch (const Fail& e) {
        if (!e.message.empty()) std::cerr << e.message << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "azed: " << e.what() << '\n';
        return kIo;
    }
    return kOk;
}
