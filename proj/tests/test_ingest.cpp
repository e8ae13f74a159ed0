#include <doctest.h>

#include <fstream>
#include <sstream>

#include "emoseq/ingest.hpp"
#include "emoseq/synth.hpp"
#include "test_support.hpp"

using namespace emoseq;

namespace {

Dataset parse(const std::string& text, Format f) {
  std::istringstream in(text);
  return read_dataset(in, f, "mem");
}

IngestError::Kind error_kind(const std::string& text, Format f, std::size_t* line = nullptr) {
  try {
    parse(text, f);
  } catch (const IngestError& e) {
    if (line) *line = e.line();
    return e.kind();
  }
  FAIL("expected an IngestError");
  return IngestError::Kind::io;
}

}  // namespace

TEST_CASE("JSONL with two threads of two comments") {
  const std::string text =
      R"({"thread_id":"a","index":1,"p_pos":0.25,"p_sub":0.5})" "\n"
      R"({"thread_id":"b","index":0,"p_pos":1,"p_sub":0})" "\n"
      R"({"thread_id":"a","index":0,"p_pos":0.75,"p_sub":0.125,"model":"lm-v2"})" "\n"
      "\n"
      R"({"thread_id":"b","index":1,"p_pos":0.5,"p_sub":0.5})" "\n";
  const Dataset ds = parse(text, Format::jsonl);
  REQUIRE(ds.threads.size() == 2);
  CHECK(ds.comment_count() == 4);
  CHECK(ds.threads[0].thread_id == "a");
  CHECK(ds.threads[0].comments[0].p_pos == 0.75);
  CHECK(ds.threads[0].comments[1].p_pos == 0.25);
  CHECK(ds.threads[1].comments[0].p_pos == 1.0);
  CHECK(validate(ds).ok());
}

TEST_CASE("integer thread ids are accepted in JSONL") {
  const Dataset ds = parse(R"({"thread_id":17,"index":0,"p_pos":0.1,"p_sub":0.2})", Format::jsonl);
  CHECK(ds.threads[0].thread_id == "17");
}

TEST_CASE("an index gap is a contiguity error naming the thread") {
  const std::string text =
      R"({"thread_id":"gappy","index":0,"p_pos":0.1,"p_sub":0.2})" "\n"
      R"({"thread_id":"gappy","index":2,"p_pos":0.1,"p_sub":0.2})" "\n";
  try {
    parse(text, Format::jsonl);
    FAIL("gap accepted");
  } catch (const IngestError& e) {
    CHECK(e.kind() == IngestError::Kind::contiguity);
    CHECK(std::string(e.what()).find("gappy") != std::string::npos);
  }
}

TEST_CASE("duplicate records report the offending line") {
  const std::string text =
      R"({"thread_id":"x","index":0,"p_pos":0.1,"p_sub":0.2})" "\n"
      R"({"thread_id":"y","index":0,"p_pos":0.1,"p_sub":0.2})" "\n"
      R"({"thread_id":"x","index":0,"p_pos":0.3,"p_sub":0.2})" "\n";
  std::size_t line = 0;
  CHECK(error_kind(text, Format::jsonl, &line) == IngestError::Kind::duplicate);
  CHECK(line == 3);
}

TEST_CASE("out of range probabilities are domain errors with location") {
  std::size_t line = 0;
  CHECK(error_kind("{\"thread_id\":\"x\",\"index\":0,\"p_pos\":0.1,\"p_sub\":0.2}\n"
                   "{\"thread_id\":\"x\",\"index\":1,\"p_pos\":1.2,\"p_sub\":0.2}\n",
                   Format::jsonl, &line) == IngestError::Kind::range);
  CHECK(line == 2);
  CHECK(error_kind("thread_id,index,p_pos,p_sub\nx,0,0.5,-0.1\n", Format::csv, &line) ==
        IngestError::Kind::range);
  CHECK(line == 2);
}

TEST_CASE("malformed lines are parse errors with line numbers") {
  std::size_t line = 0;
  CHECK(error_kind("{\"thread_id\":\"x\",\"index\":0,\"p_pos\":0.1,\"p_sub\":0.2}\n{oops\n", Format::jsonl, &line) ==
        IngestError::Kind::parse);
  CHECK(line == 2);
  CHECK(error_kind("{\"thread_id\":\"x\",\"index\":0,\"p_pos\":0.1}\n", Format::jsonl, &line) ==
        IngestError::Kind::parse);
  CHECK(error_kind("{\"thread_id\":\"x\",\"index\":-1,\"p_pos\":0.1,\"p_sub\":0.1}\n", Format::jsonl) ==
        IngestError::Kind::parse);
  CHECK(error_kind("{\"thread_id\":\"x\",\"index\":0.5,\"p_pos\":0.1,\"p_sub\":0.1}\n", Format::jsonl) ==
        IngestError::Kind::parse);
  CHECK(error_kind("thread_id,index,p_pos\n", Format::csv, &line) == IngestError::Kind::parse);
  CHECK(error_kind("thread_id,index,p_pos,p_sub\nx,0,abc,0.1\n", Format::csv, &line) == IngestError::Kind::parse);
  CHECK(line == 2);
  CHECK(error_kind("thread_id,index,p_pos,p_sub\nx,0,0.1\n", Format::csv) == IngestError::Kind::parse);
}

TEST_CASE("CSV columns may come in any order and ids may be quoted") {
  const std::string text =
      "p_sub,thread_id,p_pos,index\r\n"
      "0.5,\"a,\"\"b\"\"\",0.25,1\r\n"
      "0.75,\"a,\"\"b\"\"\",0.5,0\r\n";
  const Dataset ds = parse(text, Format::csv);
  REQUIRE(ds.threads.size() == 1);
  CHECK(ds.threads[0].thread_id == "a,\"b\"");
  CHECK(ds.threads[0].comments[0].p_pos == 0.5);
  CHECK(ds.threads[0].comments[1].p_sub == 0.5);
}

TEST_CASE("writing an empty dataset") {
  std::ostringstream jsonl, csv;
  write_dataset(Dataset{}, jsonl, Format::jsonl);
  write_dataset(Dataset{}, csv, Format::csv);
  CHECK(jsonl.str().empty());
  CHECK(csv.str() == "thread_id,index,p_pos,p_sub\n");
  CHECK(parse(csv.str(), Format::csv).threads.empty());
}

TEST_CASE("a one-comment dataset writes exactly one record") {
  const Dataset ds = test::make_dataset({{0.3}});
  std::ostringstream out;
  write_dataset(ds, out, Format::jsonl);
  CHECK(out.str() == "{\"thread_id\":\"t0\",\"index\":0,\"p_pos\":0.3,\"p_sub\":0.3}\n");
}

TEST_CASE("format_double round-trips awkward doubles") {
  for (double v : {0.1, 1.0 / 3.0, 0.9999999999999999, 5e-324, 0.30000000000000004, 1.0, 0.0}) {
    std::istringstream in(format_double(v));
    double back = -1;
    in >> back;
    if (v != 5e-324) CHECK(back == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("write then read is the identity on generated data") {
  test::TempDir dir;
  GeneratorConfig cfg;
  cfg.thread_count = 100;
  cfg.length = {LengthLaw::Kind::geometric, 100.0};
  cfg.seed = Seed{2024};
  const Dataset markov = generate_markov(two_state_chain(0.9), cfg);
  cfg.seed = Seed{2025};
  const Dataset iid = generate_iid(BetaMixture{{{0.5, 0.4, 2.0}, {0.5, 2.0, 0.4}}}, cfg);

  for (const Dataset* ds : {&markov, &iid}) {
    for (Format f : {Format::jsonl, Format::csv}) {
      const auto path = dir.file(std::string("rt.") + std::string(format_name(f)));
      write_dataset(*ds, path, f);
      const Dataset back = read_dataset(path, f);
      CHECK(back.threads == ds->threads);
      CHECK(back.source_label == path.string());
    }
  }
  CHECK(markov.comment_count() > 5000);
}

TEST_CASE("missing files are I/O errors naming the path") {
  try {
    read_dataset(std::filesystem::path("/nonexistent/dir/data.jsonl"), Format::jsonl);
    FAIL("no error");
  } catch (const IngestError& e) {
    CHECK(e.kind() == IngestError::Kind::io);
    CHECK(std::string(e.what()).find("/nonexistent/dir/data.jsonl") != std::string::npos);
  }
}

TEST_CASE("format helpers") {
  CHECK(format_from_path("x.csv") == Format::csv);
  CHECK(format_from_path("x.jsonl") == Format::jsonl);
  CHECK(parse_format("csv") == Format::csv);
  CHECK_THROWS_AS(parse_format("xml"), std::invalid_argument);
}
