#include "lwm/demo.hpp"

#include <map>
#include <random>
#include <set>

#include "lwm/corpus.hpp"
#include "lwm/error.hpp"
#include "lwm/logsource.hpp"
#include "lwm/monitor.hpp"
#include "lwm/notifier.hpp"
#include "lwm/notifier_http.hpp"
#include "lwm/subject.hpp"

namespace lwm {

namespace {

constexpr std::uint64_t kHourMs = 3600ull * 1000;
constexpr std::uint64_t kStartMs = 1'700'000'000'000ull;
constexpr std::uint64_t kDeliveryDelayMs = 5 * 60 * 1000;

struct FaultName {
  Fault fault;
  std::string_view name;
};

constexpr FaultName kFaultNames[] = {
    {Fault::None, "none"},
    {Fault::SkipNotification, "skip-notification"},
    {Fault::OmitMatch, "omit-match"},
    {Fault::ForgeSnapshot, "forge-snapshot"},
    {Fault::ReplayIndex, "replay-index"},
    {Fault::StaleSth, "stale-sth"},
};

class Feed {
 public:
  virtual ~Feed() = default;
  virtual std::string subscribe(const WildcardQuery& q) = 0;
  virtual Notification notification(const std::string& id, std::uint64_t index) = 0;
  virtual std::vector<Notification> whats_new(const std::string& id, std::optional<std::uint64_t> since) = 0;
};

class LocalFeed final : public Feed {
 public:
  explicit LocalFeed(std::unique_ptr<Notifier>& n) : n_(n) {}
  std::string subscribe(const WildcardQuery& q) override { return n_->subscribe(q); }
  Notification notification(const std::string& id, std::uint64_t index) override { return n_->notify(id, index); }
  std::vector<Notification> whats_new(const std::string& id, std::optional<std::uint64_t> since) override {
    return n_->whats_new(id, since);
  }

 private:
  std::unique_ptr<Notifier>& n_;
};

class HttpFeed final : public Feed {
 public:
  explicit HttpFeed(std::string url) : client_(std::move(url)) {}
  std::string subscribe(const WildcardQuery& q) override { return client_.subscribe(q); }
  Notification notification(const std::string& id, std::uint64_t index) override {
    return client_.notification(id, index);
  }
  std::vector<Notification> whats_new(const std::string& id, std::optional<std::uint64_t> since) override {
    return client_.whats_new(id, since);
  }

 private:
  NotifierClient client_;
};

using CertBag = std::multiset<std::pair<std::string, Bytes>>;

struct SubjectRun {
  std::string id;
  std::string query;
  std::optional<Subject> subject;
  std::size_t evidence_seen = 0;
  std::size_t redeliveries = 0;
  std::map<std::uint64_t, std::size_t> accepted;  // index -> times
  CertBag certs;
  std::optional<std::uint64_t> blocked_at;
  bool retry = true;
};

class TempDir {
 public:
  explicit TempDir(std::optional<std::filesystem::path> given) {
    if (given) {
      path_ = *given;
    } else {
      path_ = std::filesystem::temp_directory_path() / ("lwm_demo_" + to_hex(random_bytes(6)));
      owned_ = true;
    }
    std::filesystem::create_directories(path_);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  ~TempDir() {
    std::error_code ec;
    if (owned_) std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  bool owned_ = false;
};

class Demo {
 public:
  explicit Demo(const DemoConfig& cfg)
      : cfg_(cfg),
        rng_(cfg.seed),
        key_(SigningKey::from_seed(sha256(bytes_of_seed(cfg.seed)).bytes)) {
    if (cfg.restart || cfg.work_dir) dir_.emplace(cfg.work_dir);
    report_.inject = cfg.inject;
    report_.intervals = cfg.intervals;
    report_.fault_interval = cfg.fault_interval.value_or(cfg.intervals / 2);
  }

  DemoReport run() {
    auto corpus = synthetic_corpus(cfg_.subjects + 400, cfg_.seed);
    bases_.assign(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(cfg_.subjects));
    pool_.assign(corpus.begin() + static_cast<std::ptrdiff_t>(cfg_.subjects), corpus.end());

    open_log();
    if (cfg_.http) {
      remote_ = std::make_unique<HttpLogSource>("http://127.0.0.1:" + std::to_string(log_port_));
    }
    open_notifier();
    monitor_.emplace(source(), key_.public_key(), 0, [this] { return now_; });
    if (cfg_.http)
      feed_ = std::make_unique<HttpFeed>("http://127.0.0.1:" + std::to_string(notifier_port_));
    else
      feed_ = std::make_unique<LocalFeed>(notifier_);

    for (std::size_t k = 0; k < cfg_.subjects; ++k) {
      SubjectRun s;
      s.query = "*." + bases_[k];
      SubjectConfig sc;
      sc.log_key = key_.public_key();
      sc.query = WildcardQuery::parse(s.query);
      s.id = feed_->subscribe(sc.query);
      s.subject.emplace(std::move(sc));
      subjects_.push_back(std::move(s));
    }

    const std::size_t restart_at = cfg_.intervals / 2;
    for (std::size_t t = 0; t < cfg_.intervals; ++t) {
      submit_interval();
      if (cfg_.restart && t == restart_at) restart();
      issue(t);
    }
    return finish();
  }

 private:
  static Bytes bytes_of_seed(std::uint64_t seed) {
    ByteWriter w;
    w.u64(seed);
    return std::move(w).take();
  }

  LogSource& source() { return remote_ ? static_cast<LogSource&>(*remote_) : local_; }

  void open_log() {
    LogOptions lo;
    lo.interval_ms = kHourMs;
    if (dir_) lo.data_dir = dir_->path() / "log";
    log_ = std::make_unique<Log>(key_, lo);
    local_.rebind(log_.get());
    if (report_.fault_interval >= issued_) apply_faults();
    if (cfg_.http) {
      log_server_ = std::make_unique<LogServer>(*log_);
      log_port_ = log_server_->start("127.0.0.1", log_port_);
    }
  }

  void open_notifier() {
    NotifierOptions no;
    no.clock = [this] { return now_; };
    no.log_key = key_.public_key();
    if (dir_) no.state_dir = dir_->path() / "notifier";
    notifier_ = std::make_unique<Notifier>(source(), std::move(no));
    if (cfg_.http) {
      notifier_server_ = std::make_unique<NotifierServer>(*notifier_);
      notifier_port_ = notifier_server_->start("127.0.0.1", notifier_port_);
    }
  }

  void apply_faults() {
    const std::uint64_t f = report_.fault_interval;
    LogFaults faults;
    switch (cfg_.inject) {
      case Fault::ForgeSnapshot: faults.forge_snapshot_at = f; break;
      case Fault::ReplayIndex: faults.replay_index_at = f; break;
      case Fault::StaleSth: faults.stale_timestamp_at = f; break;
      default: return;
    }
    log_->set_faults(faults);
  }

  void restart() {
    for (std::size_t k = 0; k < subjects_.size(); ++k) {
      subjects_[k].subject->save(dir_->path() / ("subject" + std::to_string(k) + ".json"));
      subjects_[k].subject.reset();
    }
    notifier_server_.reset();
    notifier_.reset();
    log_server_.reset();
    local_.rebind(nullptr);
    log_.reset();

    try {
      (void)monitor_->step();
    } catch (const Error& e) {
      if (e.code() != Errc::LogUnreachable) throw;
      ++report_.outages;
    }

    open_log();
    open_notifier();
    for (std::size_t k = 0; k < subjects_.size(); ++k)
      subjects_[k].subject.emplace(Subject::load(dir_->path() / ("subject" + std::to_string(k) + ".json")));
  }

  Bytes blob() {
    Bytes b(cfg_.blob_size);
    for (auto& x : b) x = static_cast<std::uint8_t>(rng_());
    return b;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

  void submit(const std::string& name) {
    auto b = blob();
    if (remote_)
      remote_->submit(name, b);
    else
      log_->submit(name, std::move(b));
  }

  void submit_interval() {
    static const std::vector<std::string> kLabels = {"www", "mail", "api", "cdn", "shop", "m", "dev"};
    for (const auto& base : bases_) {
      for (std::size_t n = 1 + pick(3); n > 0; --n) {
        switch (pick(3)) {
          case 0: submit(base); break;
          case 1: submit(kLabels[pick(kLabels.size())] + "." + base); break;
          default: submit(kLabels[pick(kLabels.size())] + "." + kLabels[pick(kLabels.size())] + "." + base);
        }
      }
      // Shares the subject's suffix but not its domain.
      if (pick(2) == 0) submit("x" + base);
    }
    for (std::size_t n = 0; n < cfg_.noise_per_interval; ++n) {
      const auto& name = pool_[pick(pool_.size())];
      submit(pick(3) == 0 ? "www." + name : name);
    }
  }

  void issue(std::size_t t) {
    const std::uint64_t at = kStartMs + t * kHourMs;
    log_->issue_sth(at);
    ++issued_;
    now_ = at + kDeliveryDelayMs;

    std::vector<std::uint64_t> fresh;
    for (const auto& b : notifier_->poll())
      if (b->snapshot_ok) fresh.push_back(sth_index(b->sth));
    for (const auto& v : monitor_->step())
      if (v.evidence) record(t, "monitor", *v.evidence);
    for (const auto& e : notifier_->evidence()) record(t, "notifier", e);

    for (std::size_t k = 0; k < subjects_.size(); ++k) {
      deliver(k, fresh, t);
      auto& s = subjects_[k];
      const auto& ev = s.subject->evidence();
      for (; s.evidence_seen < ev.size(); ++s.evidence_seen) record(t, "subject" + std::to_string(k), ev[s.evidence_seen]);
    }
  }

  void record(std::size_t t, const std::string& party, const Evidence& e) {
    auto enc = e.encode();
    if (!seen_evidence_.insert(party + to_hex(sha256(enc).bytes)).second) return;
    report_.events.push_back({t, party, e.kind, verify_evidence(enc, key_.public_key())});
  }

  bool handle(SubjectRun& s, const Notification& n) {
    auto out = s.subject->verify_notification(n, now_);
    if (out.status == VerifyOutcome::Status::Duplicate) {
      ++s.redeliveries;
      return true;
    }
    if (!out.accepted()) return false;
    ++s.accepted[sth_index(n.sth)];
    for (const auto& m : out.matches)
      for (const auto& c : m.certificates) s.certs.emplace(m.name.str(), c);
    return true;
  }

  void recover(SubjectRun& s) {
    const auto next = s.subject->expected_next_index();
    std::vector<Notification> got;
    try {
      got = feed_->whats_new(s.id, next > 0 ? std::optional(next - 1) : std::nullopt);
    } catch (const Error&) {
      s.blocked_at = next;
      return;
    }
    for (const auto& n : got) {
      if (!handle(s, n)) {
        s.blocked_at = s.subject->expected_next_index();
        s.retry = false;
        return;
      }
    }
    auto latest = notifier_->latest_index();
    if (latest && s.subject->expected_next_index() <= *latest)
      s.blocked_at = s.subject->expected_next_index();
    else
      s.blocked_at.reset();
  }

  void deliver(std::size_t k, const std::vector<std::uint64_t>& fresh, std::size_t t) {
    auto& s = subjects_[k];
    if (s.blocked_at) {
      if (s.retry) recover(s);
      return;
    }
    for (auto idx : fresh) {
      if (idx < s.subject->expected_next_index()) continue;
      Notification n;
      try {
        n = feed_->notification(s.id, idx);
      } catch (const Error&) {
        continue;
      }
      if (k == 0 && t == report_.fault_interval) {
        if (cfg_.inject == Fault::SkipNotification) continue;
        if (cfg_.inject == Fault::OmitMatch && !n.proof.matches.empty()) {
          n.proof.matches.pop_back();
          n.certificates.pop_back();
        }
      }
      if (!handle(s, n)) {
        recover(s);
        return;
      }
    }
  }

  DemoReport finish() {
    auto all = log_->get_entries(0, log_->size());
    report_.log_entries = all.size();
    for (auto& s : subjects_) {
      auto q = WildcardQuery::parse(s.query);
      CertBag want;
      for (const auto& e : all)
        if (q.matches(e.subject)) want.emplace(e.subject.str(), e.blob);
      SubjectSummary sum;
      sum.query = s.query;
      sum.next_index = s.subject->expected_next_index();
      sum.accepted = s.accepted.size();
      for (const auto& [idx, times] : s.accepted) sum.duplicates += times - 1;
      sum.duplicates += s.redeliveries;
      sum.certificates = s.certs.size();
      sum.matches_oracle = s.certs == want;
      sum.stalled_at = s.blocked_at;
      report_.subjects.push_back(std::move(sum));
    }
    return std::move(report_);
  }

  const DemoConfig& cfg_;
  std::mt19937_64 rng_;
  SigningKey key_;
  std::optional<TempDir> dir_;

  std::uint64_t now_ = kStartMs;
  std::size_t issued_ = 0;
  std::vector<std::string> bases_;
  std::vector<std::string> pool_;

  std::unique_ptr<Log> log_;
  LocalLogSource local_;
  std::unique_ptr<LogServer> log_server_;
  std::unique_ptr<HttpLogSource> remote_;
  int log_port_ = 0;
  std::unique_ptr<Notifier> notifier_;
  std::unique_ptr<NotifierServer> notifier_server_;
  int notifier_port_ = 0;
  std::optional<Monitor> monitor_;
  std::unique_ptr<Feed> feed_;
  std::vector<SubjectRun> subjects_;
  std::set<std::string> seen_evidence_;
  DemoReport report_;
};

}  // namespace

std::string_view to_string(Fault f) {
  for (const auto& [fault, name] : kFaultNames)
    if (fault == f) return name;
  return "unknown";
}

std::optional<Fault> fault_from_string(std::string_view s) {
  if (s == "omit-from-lwm") return Fault::ForgeSnapshot;
  for (const auto& [fault, name] : kFaultNames)
    if (name == s) return fault;
  return std::nullopt;
}

EvidenceKind expected_evidence(Fault f) {
  switch (f) {
    case Fault::SkipNotification: return EvidenceKind::IndexGap;
    case Fault::OmitMatch: return EvidenceKind::ProofInvalid;
    case Fault::ForgeSnapshot: return EvidenceKind::SnapshotMismatch;
    case Fault::ReplayIndex: return EvidenceKind::IndexReplay;
    case Fault::StaleSth: return EvidenceKind::StaleTimestamp;
    case Fault::None: break;
  }
  throw Error(Errc::Config, "no evidence expected without a fault");
}

std::vector<Fault> all_faults() {
  return {Fault::SkipNotification, Fault::OmitMatch, Fault::ForgeSnapshot, Fault::ReplayIndex, Fault::StaleSth};
}

bool DemoReport::clean() const {
  if (!events.empty()) return false;
  for (const auto& s : subjects)
    if (s.next_index != intervals || s.accepted != intervals || s.duplicates != 0 || !s.matches_oracle ||
        s.stalled_at)
      return false;
  return true;
}

bool DemoReport::fault_detected() const {
  bool found = false;
  for (const auto& e : events) {
    if (!e.verifies) return false;
    if (e.kind == expected_evidence(inject) && e.interval >= fault_interval && e.interval <= fault_interval + 1)
      found = true;
  }
  return found;
}

Json DemoReport::to_json() const {
  Json ev = Json::array();
  for (const auto& e : events)
    ev.push_back({{"interval", e.interval}, {"party", e.party}, {"kind", to_string(e.kind)}, {"verifies", e.verifies}});
  Json subs = Json::array();
  for (const auto& s : subjects) {
    Json j = {{"query", s.query},
              {"next_index", s.next_index},
              {"accepted", s.accepted},
              {"duplicates", s.duplicates},
              {"certificates", s.certificates},
              {"matches_oracle", s.matches_oracle}};
    if (s.stalled_at) j["stalled_at"] = *s.stalled_at;
    subs.push_back(std::move(j));
  }
  Json j = {{"inject", to_string(inject)}, {"intervals", intervals}, {"log_entries", log_entries},
            {"outages", outages},          {"events", ev},           {"subjects", subs},
            {"ok", ok()}};
  if (inject != Fault::None) j["fault_interval"] = fault_interval;
  return j;
}

DemoReport run_demo(const DemoConfig& config) {
  if (config.intervals == 0 || config.subjects == 0) throw Error(Errc::Config, "need at least one interval and subject");
  if (config.inject != Fault::None) {
    auto f = config.fault_interval.value_or(config.intervals / 2);
    if (f + 1 >= config.intervals) throw Error(Errc::Config, "fault interval must leave one interval after it");
    if (config.inject == Fault::ReplayIndex && f == 0) throw Error(Errc::Config, "replay needs an earlier index");
  }
  if (config.restart && config.intervals < 2) throw Error(Errc::Config, "restart needs two intervals");
  return Demo(config).run();
}

}  // namespace lwm
