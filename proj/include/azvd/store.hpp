#pragma once

#include <azvd/document.hpp>
#include <azvd/parser.hpp>

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <vector>

namespace azvd {

/// Filesystem failure or a store file that cannot be recovered.
class StoreError : public Error {
public:
    using Error::Error;
};

class UnknownDocument : public Error {
public:
    explicit UnknownDocument(const std::string& id) : Error("unknown document '" + id + "'") {}
};

/// Base revision of a write is not the current one.
class RevisionConflict : public Error {
public:
    RevisionConflict(std::uint64_t expected, std::uint64_t current)
        : Error("revision conflict: request is based on " + std::to_string(expected) + ", document is at " +
                std::to_string(current)),
          current_(current) {}
    std::uint64_t current() const { return current_; }

private:
    std::uint64_t current_;
};

struct StoredDocument {
    Document doc;
    std::uint64_t revision = 0;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline std::string read_all(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw StoreError("cannot read " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_synced(const std::filesystem::path& p, std::string_view data) {
    int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw StoreError("cannot open " + p.string() + " for writing");
    std::size_t done = 0;
    while (done < data.size()) {
        ssize_t n = ::write(fd, data.data() + done, data.size() - done);
        if (n < 0) {
            ::close(fd);
            throw StoreError("write failed for " + p.string());
        }
        done += static_cast<std::size_t>(n);
    }
    const bool ok = ::fsync(fd) == 0;
    ::close(fd);
    if (!ok) throw StoreError("fsync failed for " + p.string());
}

inline void sync_dir(const std::filesystem::path& dir) {
    int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
    if (fd < 0) return;
    ::fsync(fd);
    ::close(fd);
}

inline std::string document_text(const Document& doc) {
    std::string out;
    for (const auto& p : doc.pieces()) out += print_canonical(p) + "\n";
    return out;
}

inline std::vector<Expression> parse_lines(std::string_view text) {
    std::vector<Expression> out;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (line.find_first_not_of(" \t\r") != std::string_view::npos) out.push_back(parse(line));
        start = end + 1;
    }
    return out;
}

}  // namespace detail

/// One `<id>.azee` file (canonical text, one piece per line) plus a
/// `<id>.json` sidecar (id, revision, content hash, undo history) per
/// document.
///
/// A write goes data to `<id>.azee.tmp`, then the sidecar by rename, then
/// the data by rename. The sidecar rename is the commit point: on reload a
/// data file whose hash disagrees with the sidecar is replaced by the
/// temporary file if that one matches.
class DocumentStore {
public:
    DocumentStore(std::filesystem::path root, const Registry& reg) : root_(std::move(root)), reg_(reg) {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec || !std::filesystem::is_directory(root_)) throw StoreError("cannot use store directory " + root_.string());
        std::vector<std::string> found;
        for (const auto& entry : std::filesystem::directory_iterator(root_)) {
            const auto& p = entry.path();
            if (p.extension() == ".json" && p.stem().extension().empty()) found.push_back(p.stem().string());
        }
        for (const auto& id : found) {
            auto slot = std::make_shared<Slot>();
            slot->current = recover(id);
            slots_.emplace(id, std::move(slot));
        }
        // Leftovers of a create that never reached its commit point.
        std::vector<std::filesystem::path> stray;
        for (const auto& entry : std::filesystem::directory_iterator(root_))
            if (entry.path().extension() == ".tmp" && !slots_.count(entry.path().stem().stem().string()))
                stray.push_back(entry.path());
        for (const auto& p : stray) std::filesystem::remove(p, ec);
    }

    const Registry& registry() const { return reg_; }
    const std::filesystem::path& root() const { return root_; }

    /// Checks every piece and persists the document at revision 1.
    StoredDocument create(std::vector<Expression> pieces) {
        auto slot = std::make_shared<Slot>();
        std::unique_lock lock(map_mutex_);
        std::string id;
        do {
            id = random_id();
        } while (slots_.count(id));
        slot->current = {Document::create(reg_, id, std::move(pieces)), 1};
        persist(slot->current);
        slots_.emplace(id, slot);
        return slot->current;
    }

    StoredDocument get(const std::string& id) const {
        auto slot = find(id);
        std::lock_guard lock(slot->mutex);
        return slot->current;
    }

    std::vector<std::string> ids() const {
        std::shared_lock lock(map_mutex_);
        std::vector<std::string> out;
        for (const auto& [id, _] : slots_) out.push_back(id);
        return out;
    }

    /// Applies `edit` to the document if it is still at `base_revision`.
    /// Writes to one document are serialized; a failed edit changes nothing.
    template <typename Edit>
    StoredDocument update(const std::string& id, std::uint64_t base_revision, Edit&& edit) {
        auto slot = find(id);
        std::lock_guard lock(slot->mutex);
        if (slot->current.revision != base_revision) throw RevisionConflict(base_revision, slot->current.revision);
        StoredDocument next{edit(static_cast<const Document&>(slot->current.doc)), slot->current.revision + 1};
        persist(next);
        slot->current = std::move(next);
        return slot->current;
    }

private:
    struct Slot {
        mutable std::mutex mutex;
        StoredDocument current;
    };

    std::shared_ptr<Slot> find(const std::string& id) const {
        std::shared_lock lock(map_mutex_);
        auto it = slots_.find(id);
        if (it == slots_.end()) throw UnknownDocument(id);
        return it->second;
    }

    std::string random_id() {
        std::lock_guard lock(rng_mutex_);
        return detail::hex64(rng_());
    }

    std::filesystem::path data_path(const std::string& id) const { return root_ / (id + ".azee"); }
    std::filesystem::path meta_path(const std::string& id) const { return root_ / (id + ".json"); }
    static std::filesystem::path tmp(std::filesystem::path p) { return p += ".tmp"; }

    void persist(const StoredDocument& d) const {
        const std::string& id = d.doc.id();
        const std::string text = detail::document_text(d.doc);
        nlohmann::json meta = {{"id", id},
                               {"revision", d.revision},
                               {"hash", detail::hex64(detail::fnv1a(text))},
                               {"history", nlohmann::json::array()}};
        for (const auto& h : d.doc.history())
            meta["history"].push_back(
                {{"piece", h.piece}, {"path", h.path.to_string()}, {"previous", print_canonical(h.previous)}});
        try {
            detail::write_synced(tmp(data_path(id)), text);
            detail::write_synced(tmp(meta_path(id)), meta.dump(1) + "\n");
            std::filesystem::rename(tmp(meta_path(id)), meta_path(id));
            std::filesystem::rename(tmp(data_path(id)), data_path(id));
        } catch (const std::filesystem::filesystem_error& e) {
            throw StoreError(e.what());
        }
        detail::sync_dir(root_);
    }

    StoredDocument recover(const std::string& id) const {
        nlohmann::json meta;
        try {
            meta = nlohmann::json::parse(detail::read_all(meta_path(id)));
        } catch (const nlohmann::json::exception& e) {
            throw StoreError("corrupt sidecar for '" + id + "': " + e.what());
        }
        const std::string want = meta.at("hash").get<std::string>();
        std::error_code ec;
        std::filesystem::remove(tmp(meta_path(id)), ec);

        std::string text;
        if (std::filesystem::exists(data_path(id))) text = detail::read_all(data_path(id));
        if (detail::hex64(detail::fnv1a(text)) != want || !std::filesystem::exists(data_path(id))) {
            // Interrupted after the commit point: finish the write.
            const auto pending = tmp(data_path(id));
            if (!std::filesystem::exists(pending)) throw StoreError("data for '" + id + "' does not match its sidecar");
            text = detail::read_all(pending);
            if (detail::hex64(detail::fnv1a(text)) != want)
                throw StoreError("data for '" + id + "' does not match its sidecar");
            std::filesystem::rename(pending, data_path(id));
            detail::sync_dir(root_);
        } else {
            // Interrupted before the commit point: the old state stands.
            std::filesystem::remove(tmp(data_path(id)), ec);
        }

        try {
            std::vector<EditRecord> history;
            for (const auto& h : meta.at("history"))
                history.push_back({h.at("piece").get<std::size_t>(), Path::parse(h.at("path").get<std::string>()),
                                   parse(h.at("previous").get<std::string>())});
            std::vector<Expression> pieces = detail::parse_lines(text);
            for (const auto& p : pieces) type_check(reg_, p);
            return {Document(meta.at("id").get<std::string>(), std::move(pieces), std::move(history)),
                    meta.at("revision").get<std::uint64_t>()};
        } catch (const nlohmann::json::exception& e) {
            throw StoreError("corrupt sidecar for '" + id + "': " + e.what());
        } catch (const Error& e) {
            throw StoreError("cannot load '" + id + "': " + e.what());
        }
    }

    std::filesystem::path root_;
    const Registry& reg_;
    mutable std::shared_mutex map_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> slots_;
    std::mutex rng_mutex_;
    std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace azvd
