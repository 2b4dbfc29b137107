#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qber/error.hpp"
#include "qber/json_io.hpp"

namespace qber {

struct StoredDocument {
    std::string id;
    std::uint64_t version = 0;
    nlohmann::json document;
};

/// Keyed JSON documents with a version counter per id.
///
/// put() with `expected_version`:
///   - nullopt: unconditional write
///   - 0: create; fails with VersionConflict if the id exists
///   - n: update; fails with VersionConflict unless the stored version is n
class DocumentStore {
public:
    virtual ~DocumentStore() = default;

    virtual StoredDocument put(const std::string& collection, const std::string& id, const nlohmann::json& doc,
                               std::optional<std::uint64_t> expected_version) = 0;
    virtual StoredDocument get(const std::string& collection, const std::string& id) const = 0;
    virtual std::vector<std::string> list(const std::string& collection) const = 0;
};

/// One JSON file per document under <root>/<collection>/<id>.json. Writes
/// are serialized per id and land by write-temp-then-rename, so readers never
/// take a lock and never see a partial document.
class FileStore final : public DocumentStore {
public:
    explicit FileStore(std::filesystem::path root) : root_(std::move(root)) {
        std::error_code ec;
        std::filesystem::create_directories(root_, ec);
        if (ec) throw Error(Errc::Io, "cannot create store root " + root_.string() + ": " + ec.message());
    }

    const std::filesystem::path& root() const noexcept { return root_; }

    StoredDocument put(const std::string& collection, const std::string& id, const nlohmann::json& doc,
                       std::optional<std::uint64_t> expected_version) override {
        check_name(collection);
        check_name(id);
        std::lock_guard lock(*mutex_for(collection + "/" + id));

        const auto path = file_for(collection, id);
        std::uint64_t current = 0;
        if (std::filesystem::exists(path)) current = read(path).version;
        if (expected_version && *expected_version != current) {
            throw Error(Errc::VersionConflict,
                        collection + "/" + id + " is at version " + std::to_string(current) + ", expected " +
                            std::to_string(*expected_version),
                        {std::to_string(current)});
        }

        StoredDocument stored{id, current + 1, doc};
        std::filesystem::create_directories(path.parent_path());
        auto tmp = path;
        tmp += ".tmp-" + std::to_string(++tmp_counter_);
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw Error(Errc::Io, "cannot write " + tmp.string());
            out << nlohmann::json{{"id", stored.id}, {"version", stored.version}, {"document", stored.document}}.dump();
            out.flush();
            if (!out) throw Error(Errc::Io, "short write to " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) {
            std::filesystem::remove(tmp, ec);
            throw Error(Errc::Io, "cannot publish " + path.string());
        }
        return stored;
    }

    StoredDocument get(const std::string& collection, const std::string& id) const override {
        if (!valid_name(collection) || !valid_name(id)) throw not_found(collection, id);
        const auto path = file_for(collection, id);
        if (!std::filesystem::exists(path)) throw not_found(collection, id);
        return read(path);
    }

    std::vector<std::string> list(const std::string& collection) const override {
        std::vector<std::string> ids;
        if (!valid_name(collection)) return ids;
        const auto dir = root_ / collection;
        std::error_code ec;
        for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
            if (entry.path().extension() == ".json") ids.push_back(entry.path().stem().string());
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    }

private:
    static bool valid_name(const std::string& s) {
        return !s.empty() && s.size() <= 128 && std::all_of(s.begin(), s.end(), [](char c) {
            return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
        });
    }

    static void check_name(const std::string& s) {
        if (!valid_name(s)) throw Error(Errc::Malformed, "invalid document id '" + s + "'", {s});
    }

    static Error not_found(const std::string& collection, const std::string& id) {
        return Error(Errc::NotFound, collection + "/" + id + " not found", {id});
    }

    std::filesystem::path file_for(const std::string& collection, const std::string& id) const {
        return root_ / collection / (id + ".json");
    }

    static StoredDocument read(const std::filesystem::path& path) {
        const auto j = detail::parse_document(detail::read_file(path));
        return {j.at("id").get<std::string>(), j.at("version").get<std::uint64_t>(), j.at("document")};
    }

    std::shared_ptr<std::mutex> mutex_for(const std::string& key) {
        std::lock_guard lock(table_mutex_);
        auto& m = locks_[key];
        if (!m) m = std::make_shared<std::mutex>();
        return m;
    }

    std::filesystem::path root_;
    std::mutex table_mutex_;
    std::map<std::string, std::shared_ptr<std::mutex>> locks_;
    std::atomic<std::uint64_t> tmp_counter_{0};
};

} // namespace qber
