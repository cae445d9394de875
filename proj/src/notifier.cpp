#include "lwm/notifier.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include "lwm/codec.hpp"
#include "lwm/error.hpp"
#include "lwm/journal.hpp"

namespace lwm {

namespace {

constexpr const char* kSubscriptionsFile = "subscriptions.json";
constexpr const char* kEvidenceFile = "evidence.log";

// Same misbehaviour seen again after a restart or re-poll is recorded once.
Digest evidence_key(const Evidence& e) {
  Sha256 h;
  h.update(static_cast<std::uint8_t>(e.kind));
  for (const auto& a : e.artifacts)
    if (a.tag == ArtifactTag::Sth || a.tag == ArtifactTag::PrevSth) h.update(sha256(a.data).bytes);
  return h.finish();
}

}  // namespace

std::uint64_t system_now_ms() {
  using namespace std::chrono;
  return static_cast<std::uint64_t>(duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count());
}

Notifier::Notifier(LogSource& source, NotifierOptions options) : source_(source), options_(std::move(options)) {
  if (options_.retention == 0) throw Error(Errc::Config, "retention must be positive");
  if (options_.state_dir) {
    std::filesystem::create_directories(*options_.state_dir);
    load_state();
  }
}

void Notifier::load_state() {
  const auto& dir = *options_.state_dir;
  for (const auto& rec : journal::read_all(dir / kEvidenceFile)) {
    auto e = Evidence::decode(rec);
    evidence_keys_.insert(evidence_key(e));
    evidence_.push_back(std::move(e));
  }
  auto file = dir / kSubscriptionsFile;
  if (!std::filesystem::exists(file)) return;
  std::ifstream in(file);
  std::stringstream ss;
  ss << in.rdbuf();
  auto j = parse_json(ss.str());
  try {
    for (const auto& s : j.at("subscriptions")) {
      Subscription sub{s.at("id").get<std::string>(),
                       WildcardQuery::parse(s.at("query").get<std::string>(), s.value("apex_included", true)),
                       std::nullopt, s.value("callback_url", "")};
      if (s.contains("last_acknowledged_index") && !s["last_acknowledged_index"].is_null())
        sub.last_acknowledged_index = s["last_acknowledged_index"].get<std::uint64_t>();
      subscriptions_.emplace(sub.id, std::move(sub));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::MalformedRecord, std::string("subscriptions: ") + e.what());
  }
}

void Notifier::save_subscriptions_locked() const {
  if (!options_.state_dir) return;
  Json arr = Json::array();
  for (const auto& [id, s] : subscriptions_) {
    Json j = {{"id", id},
              {"query", s.query.raw()},
              {"apex_included", s.query.apex_included()},
              {"callback_url", s.callback_url}};
    j["last_acknowledged_index"] = s.last_acknowledged_index ? Json(*s.last_acknowledged_index) : Json(nullptr);
    arr.push_back(std::move(j));
  }
  auto text = Json{{"subscriptions", arr}}.dump(2);
  journal::write_atomic(*options_.state_dir / kSubscriptionsFile, as_bytes(text));
}

void Notifier::record(Evidence e) {
  std::lock_guard lock(mutex_);
  if (!evidence_keys_.insert(evidence_key(e)).second) return;
  if (options_.state_dir) journal::append(*options_.state_dir / kEvidenceFile, e.encode());
  evidence_.push_back(std::move(e));
}

std::shared_ptr<const Batch> Notifier::ingest(const SignedTreeHead& sth,
                                              const std::optional<SignedTreeHead>& prev) {
  const auto now = options_.clock();
  const std::uint64_t prev_size = prev ? prev->tree_size : 0;
  const Digest prev_root = prev ? prev->main_root : rfc6962_empty_root();

  auto entries = source_.entries(prev_size, sth.tree_size);
  std::vector<Digest> consistency;
  if (prev_size > 0) consistency = source_.consistency(prev_size, sth.tree_size);

  auto certificates = group_by_subject(entries);
  std::optional<Snapshot> snap;
  try {
    snap = sth_snapshot(sth);
  } catch (const Error&) {
  }
  auto tree = WildTree::build(snap ? snap->constant : BatchConstant{}, certificates);

  bool ok = true;
  if (options_.audit) {
    if (!verify_batch_binding(prev_size, prev_root, sth.tree_size, sth.main_root, entries, consistency)) {
      // The log's own entries and roots disagree; nothing here can be trusted.
      if (prev) record(evidence_binding(*prev, sth, entries, consistency, now));
      ok = false;
    } else if (!snap || tree.root() != snap->root || tree.size() != snap->batch_size) {
      record(evidence_snapshot(prev, sth, entries, consistency, now));
      ok = false;
    }
  }
  return std::make_shared<const Batch>(Batch{sth, std::move(entries), std::move(tree), std::move(certificates), ok});
}

std::vector<std::shared_ptr<const Batch>> Notifier::poll() {
  std::lock_guard poll_lock(poll_mutex_);
  auto latest = source_.latest_sth();
  if (!latest) return {};
  const auto now = options_.clock();

  if (options_.log_key && !latest->verify_signature(*options_.log_key)) {
    record(evidence_bad_signature(*latest, now));
    return {};
  }
  std::uint64_t idx = 0;
  try {
    idx = sth_index(*latest);
  } catch (const Error&) {
    return {};
  }

  std::optional<std::uint64_t> last;
  {
    std::lock_guard lock(mutex_);
    last = last_index_;
  }
  if (last && idx <= *last) {
    auto seen = batch(idx);
    if (seen && seen->sth != *latest) {
      auto prev = batch(*last);
      record(evidence_index(EvidenceKind::IndexReplay, prev ? std::optional(prev->sth) : std::nullopt, *latest,
                            *last + 1, now));
    }
    return {};
  }

  std::uint64_t from = last ? *last + 1 : (idx + 1 > options_.retention ? idx + 1 - options_.retention : 0);
  std::vector<std::shared_ptr<const Batch>> fresh;
  for (std::uint64_t i = from; i <= idx; ++i) {
    SignedTreeHead cur;
    std::optional<SignedTreeHead> prev;
    try {
      cur = i == idx ? *latest : source_.sth_at(i);
      if (i > 0) {
        auto cached = batch(i - 1);
        prev = cached ? cached->sth : source_.sth_at(i - 1);
      }
    } catch (const Error& e) {
      if (e.code() != Errc::RangeError) throw;
      auto before = i > 0 ? batch(i - 1) : nullptr;
      record(evidence_index(EvidenceKind::IndexGap, before ? std::optional(before->sth) : std::nullopt, *latest, i,
                            now));
      throw Error(Errc::IndexGapUnfillable, "log cannot serve STH " + std::to_string(i));
    }
    auto b = ingest(cur, prev);
    {
      std::lock_guard lock(mutex_);
      batches_[i] = b;
      last_index_ = i;
      while (batches_.size() > options_.retention) batches_.erase(batches_.begin());
    }
    fresh.push_back(std::move(b));
  }

  std::vector<std::pair<Subscription, Callback>> targets;
  {
    std::lock_guard lock(mutex_);
    for (const auto& [id, sub] : subscriptions_) {
      if (auto it = callbacks_.find(id); it != callbacks_.end() && it->second)
        targets.emplace_back(sub, it->second);
      else if (!sub.callback_url.empty() && push_)
        targets.emplace_back(sub, push_);
    }
  }
  for (const auto& b : fresh) {
    if (!b->snapshot_ok) continue;
    for (const auto& [sub, cb] : targets) {
      try {
        cb(sub, build(*b, sub.query));
      } catch (const std::exception&) {
        // Subscribers recover missed pushes with whats_new.
      }
    }
  }
  return fresh;
}

std::string Notifier::subscribe(const WildcardQuery& query, Callback callback, std::string callback_url) {
  std::lock_guard lock(mutex_);
  std::string id = to_hex(random_bytes(16));
  subscriptions_[id] = Subscription{id, query, std::nullopt, std::move(callback_url)};
  if (callback) callbacks_[id] = std::move(callback);
  save_subscriptions_locked();
  return id;
}

void Notifier::unsubscribe(const std::string& id) {
  std::lock_guard lock(mutex_);
  if (subscriptions_.erase(id) == 0) throw Error(Errc::UnknownSubscription, id);
  callbacks_.erase(id);
  save_subscriptions_locked();
}

Subscription Notifier::subscription(const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = subscriptions_.find(id);
  if (it == subscriptions_.end()) throw Error(Errc::UnknownSubscription, id);
  return it->second;
}

Notification Notifier::build(const Batch& b, const WildcardQuery& query) const {
  Notification n{b.sth, b.tree.prove(query), {}};
  for (const auto& m : n.proof.matches) {
    if (options_.proofs_only) {
      n.certificates.emplace_back();
    } else {
      auto it = b.certificates.find(m.name);
      n.certificates.push_back(it == b.certificates.end() ? std::vector<Bytes>{} : it->second);
    }
  }
  return n;
}

Notification Notifier::notify(const std::string& id, std::uint64_t index) const {
  WildcardQuery query = subscription(id).query;
  std::shared_ptr<const Batch> b;
  {
    std::lock_guard lock(mutex_);
    if (!last_index_ || index > *last_index_) throw Error(Errc::RangeError, "no batch " + std::to_string(index) + " yet");
    auto it = batches_.find(index);
    if (it == batches_.end()) throw Error(Errc::BatchEvicted, "batch " + std::to_string(index) + " no longer cached");
    b = it->second;
  }
  if (!b->snapshot_ok)
    throw Error(Errc::SnapshotMismatch, "signed snapshot of batch " + std::to_string(index) + " does not match");
  return build(*b, query);
}

std::vector<Notification> Notifier::whats_new(const std::string& id, std::optional<std::uint64_t> since) {
  (void)subscription(id);
  auto latest = latest_index();
  std::vector<Notification> out;
  if (since) {
    std::lock_guard lock(mutex_);
    auto& sub = subscriptions_.at(id);
    if (!sub.last_acknowledged_index || *sub.last_acknowledged_index < *since) {
      sub.last_acknowledged_index = since;
      save_subscriptions_locked();
    }
  }
  if (!latest) return out;
  if (since && *since > *latest) throw Error(Errc::RangeError, "since is past the latest index");
  for (std::uint64_t i = since ? *since + 1 : 0; i <= *latest; ++i) {
    try {
      out.push_back(notify(id, i));
    } catch (const Error&) {
      if (out.empty()) throw;
      break;
    }
  }
  return out;
}

void Notifier::set_push(Callback push) {
  std::lock_guard lock(mutex_);
  push_ = std::move(push);
}

std::optional<std::uint64_t> Notifier::latest_index() const {
  std::lock_guard lock(mutex_);
  return last_index_;
}

std::shared_ptr<const Batch> Notifier::batch(std::uint64_t index) const {
  std::lock_guard lock(mutex_);
  auto it = batches_.find(index);
  return it == batches_.end() ? nullptr : it->second;
}

std::vector<Evidence> Notifier::evidence() const {
  std::lock_guard lock(mutex_);
  return evidence_;
}

std::size_t Notifier::cached_batches() const {
  std::lock_guard lock(mutex_);
  return batches_.size();
}

}  // namespace lwm
