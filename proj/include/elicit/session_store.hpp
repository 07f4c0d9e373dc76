#pragma once

// Sessions kept in memory and, when a directory is given, persisted as one
// JSON document per session. Writes go to a temporary file that is renamed
// over the old one, so a crash leaves either the old or the new document.
// Operations on one session are serialized; different sessions proceed in
// parallel.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "elicit/session.hpp"

namespace elicit {

inline bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char ch : id) {
    if (!((ch >= 'a' && ch <= 'z') || (ch >= '0' && ch <= '9') || ch == '-')) return false;
  }
  return true;
}

class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path directory = {}, Clock clock = utc_now)
      : directory_(std::move(directory)), clock_(std::move(clock)), rng_(std::random_device{}()) {
    if (!directory_.empty()) std::filesystem::create_directories(directory_);
  }

  std::string now() const { return clock_(); }

  // Seeds default to a random value below 2^53 so they survive a round trip
  // through JSON readers that hold numbers as doubles.
  SessionRecord create(const Transform& transform, Json context, std::optional<std::uint64_t> seed = std::nullopt) {
    std::string id;
    std::uint64_t chosen = 0;
    {
      std::lock_guard lock(mutex_);
      do {
        id = random_id();
      } while (entries_.count(id) || (!directory_.empty() && std::filesystem::exists(path_of(id))));
      chosen = seed ? *seed : rng_() & ((std::uint64_t{1} << 53) - 1);
    }
    SessionRecord record = create_session(id, transform, std::move(context), chosen, clock_());
    insert(record, false);
    return record;
  }

  SessionRecord get(const std::string& id) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    return entry->record;
  }

  // Runs op on a copy of the session and commits it only if op returns
  // normally. Returns whatever op returns.
  template <typename Op>
  auto update(const std::string& id, Op&& op) {
    auto entry = find(id);
    std::lock_guard lock(entry->mutex);
    SessionRecord working = entry->record;
    if constexpr (std::is_void_v<decltype(op(working))>) {
      op(working);
      persist(working);
      entry->record = std::move(working);
    } else {
      auto result = op(working);
      persist(working);
      entry->record = std::move(working);
      return result;
    }
  }

  // Adds a validated record under its own id.
  void import(const SessionRecord& record) { insert(record, true); }

  std::vector<std::string> ids() {
    std::lock_guard lock(mutex_);
    std::vector<std::string> out;
    for (const auto& [id, entry] : entries_) out.push_back(id);
    if (!directory_.empty()) {
      for (const auto& file : std::filesystem::directory_iterator(directory_)) {
        if (file.path().extension() != ".json") continue;
        const std::string id = file.path().stem().string();
        if (valid_session_id(id) && !entries_.count(id)) out.push_back(id);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Entry {
    std::mutex mutex;
    SessionRecord record;
  };

  std::filesystem::path path_of(const std::string& id) const { return directory_ / (id + ".json"); }

  std::string random_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string id;
    for (int i = 0; i < 16; ++i) id += kHex[rng_() & 15];
    return id;
  }

  void persist(const SessionRecord& record) const {
    if (directory_.empty()) return;
    const auto target = path_of(record.id);
    auto temporary = target;
    temporary += ".tmp";
    {
      std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
      out << export_session(record);
      out.flush();
      if (!out) throw std::runtime_error("cannot write " + temporary.string());
    }
    std::filesystem::rename(temporary, target);
  }

  void insert(const SessionRecord& record, bool refuse_existing) {
    if (!valid_session_id(record.id)) {
      throw ValidationError("session-id", "session ids use only lowercase letters, digits and '-'");
    }
    std::lock_guard lock(mutex_);
    if (refuse_existing && (entries_.count(record.id) ||
                            (!directory_.empty() && std::filesystem::exists(path_of(record.id))))) {
      throw StateError("a session with id '" + record.id + "' already exists");
    }
    persist(record);
    auto entry = std::make_shared<Entry>();
    entry->record = record;
    entries_[record.id] = std::move(entry);
  }

  std::shared_ptr<Entry> find(const std::string& id) {
    if (!valid_session_id(id)) throw NotFound("no session '" + id + "'");
    std::lock_guard lock(mutex_);
    if (const auto it = entries_.find(id); it != entries_.end()) return it->second;
    if (directory_.empty() || !std::filesystem::exists(path_of(id))) throw NotFound("no session '" + id + "'");
    std::ifstream in(path_of(id), std::ios::binary);
    std::stringstream text;
    text << in.rdbuf();
    auto entry = std::make_shared<Entry>();
    entry->record = import_session(text.str());
    entries_[id] = entry;
    return entry;
  }

  std::filesystem::path directory_;
  Clock clock_;
  std::mutex mutex_;
  std::mt19937_64 rng_;
  std::map<std::string, std::shared_ptr<Entry>> entries_;
};

}  // namespace elicit
