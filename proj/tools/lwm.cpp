#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "lwm/bench.hpp"
#include "lwm/corpus.hpp"
#include "lwm/demo.hpp"
#include "lwm/error.hpp"
#include "lwm/journal.hpp"
#include "lwm/logsource.hpp"
#include "lwm/monitor.hpp"
#include "lwm/notifier_http.hpp"
#include "lwm/subject.hpp"

using namespace lwm;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

void install_signals() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

// Sleeps in short steps so a signal ends the wait promptly.
void nap(std::uint64_t ms) {
  auto until = std::chrono::steady_clock::now() + std::chrono::milliseconds(ms);
  while (!g_stop && std::chrono::steady_clock::now() < until)
    std::this_thread::sleep_for(std::chrono::milliseconds(std::min<std::uint64_t>(ms, 50)));
}

Bytes read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

std::vector<std::size_t> parse_sizes(const std::string& list) {
  std::vector<std::size_t> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      auto caret = item.find('^');
      if (caret == std::string::npos) {
        out.push_back(std::stoull(item));
        continue;
      }
      std::size_t base = std::stoull(item.substr(0, caret));
      std::size_t v = 1;
      for (auto e = std::stoul(item.substr(caret + 1)); e > 0; --e) v *= base;
      out.push_back(v);
    } catch (const std::logic_error&) {
      throw Error(Errc::Config, "bad size '" + item + "'");
    }
  }
  if (out.empty()) throw Error(Errc::Config, "no sizes given");
  return out;
}

std::filesystem::path subscription_file(const std::filesystem::path& state) {
  return std::filesystem::path(state.string() + ".sub");
}

Json outcome_json(const VerifyOutcome& out, std::uint64_t index) {
  Json j = {{"index", index}};
  switch (out.status) {
    case VerifyOutcome::Status::Accepted: j["status"] = "accepted"; break;
    case VerifyOutcome::Status::Duplicate: j["status"] = "duplicate"; break;
    case VerifyOutcome::Status::Rejected: j["status"] = "rejected"; break;
  }
  if (out.rejection) j["evidence"] = to_string(*out.rejection);
  Json matches = Json::array();
  for (const auto& m : out.matches) matches.push_back({{"name", m.name.str()}, {"certificates", m.certificates.size()}});
  j["matches"] = matches;
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable light-weight monitoring for Certificate Transparency logs"};
  app.set_config("--config", "", "key = value file; command-line flags take precedence");
  app.require_subcommand(1);
  int status = 0;

  // keygen
  std::filesystem::path key_out, pub_out;
  auto* keygen = app.add_subcommand("keygen", "Create a log signing key");
  keygen->add_option("--out", key_out, "Private key file")->required();
  keygen->add_option("--public", pub_out, "Also write the public key here");
  keygen->callback([&] {
    auto k = SigningKey::generate();
    k.save(key_out);
    if (!pub_out.empty()) k.public_key().save(pub_out);
    std::cout << base64_encode(k.public_key().bytes) << "\n";
  });

  // log
  auto* log_cmd = app.add_subcommand("log", "Run or talk to a log")->require_subcommand(1);
  std::filesystem::path log_key_file, log_data;
  std::string log_host = "127.0.0.1";
  int log_port = 8080;
  std::uint64_t sth_interval = 3600ull * 1000;
  auto* log_serve = log_cmd->add_subcommand("serve", "Serve a log over HTTP and issue STHs on a timer");
  log_serve->add_option("--key", log_key_file, "Signing key from keygen")->required();
  log_serve->add_option("--data-dir", log_data, "Journal directory");
  log_serve->add_option("--host", log_host);
  log_serve->add_option("--port", log_port);
  log_serve->add_option("--interval-ms", sth_interval, "STH interval");
  log_serve->callback([&] {
    LogOptions lo;
    lo.interval_ms = sth_interval;
    if (!log_data.empty()) lo.data_dir = log_data;
    Log log(SigningKey::load(log_key_file), lo);
    LogServer server(log);
    int port = server.start(log_host, log_port);
    std::cerr << "log listening on " << log_host << ":" << port << "\n";
    install_signals();
    while (!g_stop) {
      try {
        auto sth = log.issue_sth(system_now_ms());
        std::cout << Json{{"issued", sth_index(sth)}, {"tree_size", sth.tree_size}}.dump() << std::endl;
      } catch (const Error& e) {
        if (e.code() != Errc::RateLimited) throw;
      }
      nap(std::min<std::uint64_t>(sth_interval, 1000));
    }
    server.stop();
  });

  std::string log_url = "http://127.0.0.1:8080", submit_subject;
  std::filesystem::path submit_blob;
  auto* log_submit = log_cmd->add_subcommand("submit", "Submit one certificate blob");
  log_submit->add_option("--log-url", log_url);
  log_submit->add_option("--subject", submit_subject)->required();
  log_submit->add_option("--blob", submit_blob, "File holding the certificate")->required()->check(CLI::ExistingFile);
  log_submit->callback([&] {
    HttpLogSource src(log_url);
    std::cout << Json{{"seq", src.submit(submit_subject, read_file(submit_blob))}}.dump() << "\n";
  });

  // notifier
  auto* notifier_cmd = app.add_subcommand("notifier", "Run a notifier")->require_subcommand(1);
  std::string notifier_host = "127.0.0.1";
  int notifier_port = 8081;
  std::filesystem::path notifier_state, notifier_log_key;
  std::size_t retention = 168;
  std::uint64_t poll_ms = 5000;
  bool proofs_only = false, no_audit = false;
  auto* notifier_serve = notifier_cmd->add_subcommand("serve", "Follow a log and serve notifications");
  notifier_serve->add_option("--log-url", log_url);
  notifier_serve->add_option("--host", notifier_host);
  notifier_serve->add_option("--port", notifier_port);
  notifier_serve->add_option("--state-dir", notifier_state);
  notifier_serve->add_option("--log-key", notifier_log_key, "Refuse STHs not signed by this key");
  notifier_serve->add_option("--retention", retention, "Batches kept in memory");
  notifier_serve->add_option("--poll-ms", poll_ms);
  notifier_serve->add_flag("--proofs-only", proofs_only, "Omit certificate blobs");
  notifier_serve->add_flag("--no-audit", no_audit, "Skip the snapshot comparison");
  notifier_serve->callback([&] {
    HttpLogSource src(log_url);
    NotifierOptions no;
    no.retention = retention;
    no.proofs_only = proofs_only;
    no.audit = !no_audit;
    if (!notifier_state.empty()) no.state_dir = notifier_state;
    if (!notifier_log_key.empty()) no.log_key = PublicKey::load(notifier_log_key);
    Notifier notifier(src, no);
    NotifierServer server(notifier);
    int port = server.start(notifier_host, notifier_port);
    std::cerr << "notifier listening on " << notifier_host << ":" << port << "\n";
    install_signals();
    std::size_t evidence_seen = notifier.evidence().size();
    while (!g_stop) {
      try {
        for (const auto& b : notifier.poll())
          std::cout << Json{{"ingested", sth_index(b->sth)}, {"entries", b->entries.size()}, {"ok", b->snapshot_ok}}.dump()
                    << std::endl;
      } catch (const Error& e) {
        std::cerr << "poll: " << e.what() << "\n";
      }
      auto ev = notifier.evidence();
      for (; evidence_seen < ev.size(); ++evidence_seen) std::cout << to_json(ev[evidence_seen]).dump() << std::endl;
      nap(poll_ms);
    }
    server.stop();
  });

  // subject
  auto* subject_cmd = app.add_subcommand("subject", "Verify notifications for one query")->require_subcommand(1);
  std::filesystem::path state_file, subject_log_key;
  std::string query;
  bool no_apex = false, allow_withheld = false;
  std::uint64_t window_ms = 25ull * 3600 * 1000, skew_ms = 10ull * 60 * 1000;
  auto* subject_init = subject_cmd->add_subcommand("init", "Create subject state");
  subject_init->add_option("--state", state_file)->required();
  subject_init->add_option("--log-key", subject_log_key, "Log public key file")->required()->check(CLI::ExistingFile);
  subject_init->add_option("--query", query, "e.g. *.example.com, *example.com or www.example.com")->required();
  subject_init->add_flag("--no-apex", no_apex, "For *.X queries, leave X itself out");
  subject_init->add_flag("--allow-withheld", allow_withheld, "Accept notifications without certificates");
  subject_init->add_option("--window-ms", window_ms, "Oldest acceptable STH age");
  subject_init->add_option("--skew-ms", skew_ms, "Tolerated clock skew");
  subject_init->callback([&] {
    SubjectConfig c;
    c.log_key = PublicKey::load(subject_log_key);
    c.query = WildcardQuery::parse(query, !no_apex);
    c.window_ms = window_ms;
    c.skew_ms = skew_ms;
    c.require_certificates = !allow_withheld;
    Subject(c).save(state_file);
  });

  std::string notifier_url = "http://127.0.0.1:8081";
  bool once = false;
  std::uint64_t watch_ms = 10000;
  auto* subject_watch = subject_cmd->add_subcommand("watch", "Pull and verify notifications");
  subject_watch->add_option("--state", state_file)->required()->check(CLI::ExistingFile);
  subject_watch->add_option("--notifier-url", notifier_url);
  subject_watch->add_option("--interval-ms", watch_ms);
  subject_watch->add_flag("--once", once, "Fetch once and exit; nonzero exit on a rejection");
  subject_watch->callback([&] {
    auto subject = Subject::load(state_file);
    NotifierClient client(notifier_url);
    std::string id;
    auto sub_file = subscription_file(state_file);
    if (std::filesystem::exists(sub_file)) {
      auto raw = read_file(sub_file);
      id.assign(raw.begin(), raw.end());
    } else {
      id = client.subscribe(subject.config().query);
      journal::write_atomic(sub_file, Bytes(id.begin(), id.end()));
    }
    install_signals();
    bool rejected = false;
    while (!g_stop) {
      try {
        auto next = subject.expected_next_index();
        for (const auto& n : client.whats_new(id, next > 0 ? std::optional(next - 1) : std::nullopt)) {
          auto out = subject.verify_notification(n, system_now_ms());
          std::cout << outcome_json(out, sth_index(n.sth)).dump() << std::endl;
          if (out.status == VerifyOutcome::Status::Rejected) {
            rejected = true;
            break;
          }
        }
        subject.save(state_file);
      } catch (const Error& e) {
        std::cerr << "watch: " << e.what() << "\n";
        if (once) throw;
      }
      if (once) break;
      nap(watch_ms);
    }
    if (rejected) status = 1;
  });

  std::filesystem::path notification_file;
  auto* subject_verify = subject_cmd->add_subcommand("verify", "Verify one notification (JSON) and update state");
  subject_verify->add_option("--state", state_file)->required()->check(CLI::ExistingFile);
  subject_verify->add_option("--notification", notification_file)->required()->check(CLI::ExistingFile);
  subject_verify->callback([&] {
    auto subject = Subject::load(state_file);
    auto raw = read_file(notification_file);
    auto n = notification_from_json(parse_json(std::string(raw.begin(), raw.end())));
    auto out = subject.verify_notification(n, system_now_ms());
    subject.save(state_file);
    std::cout << outcome_json(out, sth_index(n.sth)).dump() << "\n";
    if (out.status == VerifyOutcome::Status::Rejected) status = 1;
  });

  auto* evidence_cmd = subject_cmd->add_subcommand("evidence", "Export or check evidence")->require_subcommand(1);
  std::filesystem::path evidence_file;
  auto* evidence_export = evidence_cmd->add_subcommand("export", "Write all evidence records to a file");
  evidence_export->add_option("--state", state_file)->required()->check(CLI::ExistingFile);
  evidence_export->add_option("--out", evidence_file)->required();
  evidence_export->callback([&] {
    auto subject = Subject::load(state_file);
    journal::write_atomic(evidence_file, subject.export_evidence());
    std::cout << Json{{"records", subject.evidence().size()}}.dump() << "\n";
  });
  auto* evidence_verify = evidence_cmd->add_subcommand("verify", "Re-check exported evidence");
  evidence_verify->add_option("--file", evidence_file)->required()->check(CLI::ExistingFile);
  evidence_verify->add_option("--log-key", subject_log_key)->required()->check(CLI::ExistingFile);
  evidence_verify->callback([&] {
    auto key = PublicKey::load(subject_log_key);
    auto records = journal::unpack(read_file(evidence_file));
    for (std::size_t i = 0; i < records.size(); ++i) {
      bool valid = verify_evidence(records[i], key);
      Json j = {{"record", i}, {"valid", valid}};
      try {
        j["kind"] = to_string(Evidence::decode(records[i]).kind);
      } catch (const Error&) {
      }
      std::cout << j.dump() << "\n";
      if (!valid) status = 1;
    }
  });

  // monitor
  std::filesystem::path monitor_key;
  std::uint64_t from_index = 0, monitor_ms = 10000;
  bool continuous = false;
  auto* monitor_cmd = app.add_subcommand("monitor", "Download every batch and audit each STH");
  monitor_cmd->add_option("--log-url", log_url);
  monitor_cmd->add_option("--log-key", monitor_key)->required()->check(CLI::ExistingFile);
  monitor_cmd->add_option("--from-index", from_index);
  monitor_cmd->add_flag("--continuous", continuous, "Keep following the log");
  monitor_cmd->add_option("--interval-ms", monitor_ms);
  monitor_cmd->callback([&] {
    HttpLogSource src(log_url);
    Monitor m(src, PublicKey::load(monitor_key), from_index);
    install_signals();
    do {
      try {
        for (const auto& v : m.step()) {
          std::cout << v.to_json().dump() << std::endl;
          if (!v.ok) status = 1;
        }
      } catch (const Error& e) {
        std::cerr << "monitor: " << e.what() << "\n";
        if (!continuous) throw;
      }
      if (continuous) nap(monitor_ms);
    } while (continuous && !g_stop);
  });

  // demo
  DemoConfig demo;
  std::string inject = "none";
  std::size_t seeds = 1;
  bool demo_json = false;
  std::filesystem::path work_dir;
  std::size_t fault_interval = 0;
  auto* demo_cmd = app.add_subcommand("demo", "In-process log, notifier, monitor and subjects on a simulated clock");
  demo_cmd->add_option("--seed", demo.seed);
  demo_cmd->add_option("--seeds", seeds, "Run this many consecutive seeds");
  demo_cmd->add_option("--intervals", demo.intervals);
  demo_cmd->add_option("--subjects", demo.subjects);
  demo_cmd->add_option("--noise", demo.noise_per_interval, "Unrelated names per interval");
  demo_cmd->add_option("--inject", inject,
                       "none, skip-notification, omit-match, forge-snapshot (omit-from-lwm), replay-index, stale-sth");
  auto* fault_opt = demo_cmd->add_option("--fault-interval", fault_interval);
  demo_cmd->add_flag("--restart", demo.restart, "Restart log, notifier and subjects mid-run");
  demo_cmd->add_option("--work-dir", work_dir);
  demo_cmd->add_flag("--http", demo.http, "Talk to log and notifier over loopback HTTP");
  demo_cmd->add_flag("--json", demo_json, "Print full reports");
  demo_cmd->callback([&] {
    auto f = fault_from_string(inject);
    if (!f) throw Error(Errc::Config, "unknown fault '" + inject + "'");
    demo.inject = *f;
    if (fault_opt->count() > 0) demo.fault_interval = fault_interval;
    if (!work_dir.empty()) demo.work_dir = work_dir;
    std::size_t failed = 0;
    const auto first = demo.seed;
    for (std::size_t i = 0; i < seeds; ++i) {
      demo.seed = first + i;
      auto r = run_demo(demo);
      if (!r.ok()) ++failed;
      if (demo_json) {
        auto j = r.to_json();
        j["seed"] = demo.seed;
        std::cout << j.dump() << "\n";
        continue;
      }
      std::size_t accepted = 0, certs = 0;
      for (const auto& s : r.subjects) {
        accepted += s.accepted;
        certs += s.certificates;
      }
      std::cout << "seed " << demo.seed << ": " << r.intervals << " intervals, " << r.log_entries << " entries, "
                << r.subjects.size() << " subjects, " << accepted << " notifications accepted, " << certs
                << " certificates, " << r.events.size() << " evidence records";
      if (r.inject != Fault::None) std::cout << ", fault " << to_string(r.inject) << " at " << r.fault_interval;
      std::cout << " -> " << (r.ok() ? "ok" : "FAILED") << "\n";
      for (const auto& e : r.events)
        std::cout << "  interval " << e.interval << " " << e.party << ": " << to_string(e.kind)
                  << (e.verifies ? "" : " (does not verify)") << "\n";
    }
    if (failed > 0) status = 1;
  });

  // bench
  std::filesystem::path corpus_file, csv_out;
  std::string sizes = "1024,2048,4096,8192,16384,32768,65536,131072";
  BenchOptions bench;
  bool extreme = false;
  auto* bench_cmd = app.add_subcommand("bench", "Time snapshot builds and proofs");
  bench_cmd->add_option("--corpus", corpus_file, "rank,domain CSV")->required();
  bench_cmd->add_option("--sizes", sizes, "Comma-separated batch sizes; 2^k accepted");
  bench_cmd->add_flag("--extreme", extreme, "Append the 689245 batch size");
  bench_cmd->add_option("--out", csv_out, "CSV output file");
  bench_cmd->add_option("--samples", bench.samples, "Proofs per measurement");
  bench_cmd->add_option("--blob-size", bench.blob_size, "Certificate size in bytes");
  bench_cmd->add_option("--tld-query", bench.tld_query, "Whole-zone query; empty to skip");
  bench_cmd->add_option("--seed", bench.seed);
  bench_cmd->callback([&] {
    bench.sizes = parse_sizes(sizes);
    if (extreme) bench.sizes.push_back(689245);
    auto largest = *std::max_element(bench.sizes.begin(), bench.sizes.end());
    auto rows = run_bench(read_corpus(corpus_file, largest), bench);
    write_bench_table(std::cout, rows);
    if (!csv_out.empty()) {
      std::ofstream f(csv_out, std::ios::trunc);
      if (!f) throw Error(Errc::Io, "cannot write " + csv_out.string());
      write_bench_csv(f, rows);
    }
  });

  // corpus
  std::filesystem::path corpus_out;
  std::size_t corpus_count = 131072;
  std::uint64_t corpus_seed = 1;
  auto* corpus_cmd = app.add_subcommand("corpus", "Write a synthetic rank,domain list");
  corpus_cmd->add_option("--out", corpus_out)->required();
  corpus_cmd->add_option("--count", corpus_count);
  corpus_cmd->add_option("--seed", corpus_seed);
  corpus_cmd->callback([&] { write_corpus(corpus_out, synthetic_corpus(corpus_count, corpus_seed)); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return status;
}
