#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "lwm/bench.hpp"
#include "lwm/corpus.hpp"
#include "lwm/crypto.hpp"
#include "lwm/demo.hpp"
#include "lwm/error.hpp"

using namespace lwm;

TEST_CASE("synthetic corpus is deterministic, unique and mostly .com") {
  auto a = synthetic_corpus(5000, 3);
  CHECK(a == synthetic_corpus(5000, 3));
  CHECK(a != synthetic_corpus(5000, 4));
  std::set<std::string> uniq(a.begin(), a.end());
  CHECK(uniq.size() == a.size());
  auto com = std::count_if(a.begin(), a.end(), [](const std::string& s) { return s.ends_with(".com") && !s.ends_with(".com.br") && !s.ends_with(".com.au"); });
  CHECK(com > 2000);
  CHECK(com < 3000);
}

TEST_CASE("corpus files round-trip and tolerate junk") {
  auto dir = std::filesystem::temp_directory_path() / ("lwm_corpus_" + to_hex(random_bytes(4)));
  std::filesystem::create_directories(dir);
  auto names = synthetic_corpus(100, 1);
  write_corpus(dir / "c.csv", names);
  CHECK(read_corpus(dir / "c.csv") == names);
  CHECK(read_corpus(dir / "c.csv", 10).size() == 10);

  {
    std::ofstream f(dir / "messy.csv");
    f << "rank,domain\r\n1,Example.COM\r\n2,bad..name\n3,example.com\n4,www.test.org.\nplain.net\n";
  }
  CHECK(read_corpus(dir / "messy.csv") == std::vector<std::string>{"example.com", "www.test.org", "plain.net"});
  CHECK_THROWS_AS((void)read_corpus(dir / "missing.csv"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("bench output has a fixed schema") {
  BenchOptions o;
  o.sizes = {64, 256};
  o.samples = 20;
  o.blob_size = 100;
  auto rows = run_bench(synthetic_corpus(256, 2), o);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].n == 256);
  CHECK(rows[1].tld_matches > 0);
  std::ostringstream csv;
  write_bench_csv(csv, rows);
  std::string header;
  std::istringstream in(csv.str());
  std::getline(in, header);
  CHECK(header.rfind("n,build_ms,member_gen_us,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 14);
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 14);
    ++lines;
  }
  CHECK(lines == 2);

  o.sizes = {1000};
  CHECK_THROWS_AS((void)run_bench(synthetic_corpus(10, 2), o), Error);
}

TEST_CASE("demo configuration and fault names") {
  CHECK(fault_from_string("omit-from-lwm") == Fault::ForgeSnapshot);
  for (auto f : all_faults()) CHECK(fault_from_string(to_string(f)) == f);
  CHECK_FALSE(fault_from_string("nope"));

  DemoConfig c;
  c.inject = Fault::SkipNotification;
  c.fault_interval = 9;
  CHECK_THROWS_AS((void)run_demo(c), Error);
  c.inject = Fault::ReplayIndex;
  c.fault_interval = 0;
  CHECK_THROWS_AS((void)run_demo(c), Error);

  DemoConfig honest;
  honest.intervals = 4;
  auto r = run_demo(honest);
  CHECK(r.clean());
  auto j = r.to_json();
  CHECK(j["ok"] == true);
  CHECK(j["subjects"].size() == 3);
  CHECK(j["events"].empty());
}
