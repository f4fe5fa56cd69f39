#include <catch2/catch.hpp>

#include <cstdio>
#include <filesystem>

#include "teig/rng.hpp"
#include "teig/tensor_io.hpp"

using namespace teig;

TEST_CASE("tensor JSON round-trip is byte-stable and exact") {
  RandomStream rng(5);
  SymTensor t = random_sym(4, 4, rng);
  std::string text = tensor_to_json(t);
  SymTensor back = parse_tensor_json(text);
  REQUIRE(back.entry_count() == t.entry_count());
  for (std::size_t k = 0; k < t.entry_count(); ++k) {
    CHECK(back.entry_index(k) == t.entry_index(k));
    CHECK(back.entry_value(k) == t.entry_value(k));  // bitwise through shortest round-trip
  }
  CHECK(tensor_to_json(back) == text);
}

TEST_CASE("tensor JSON uses 1-based indices on disk") {
  SymTensor t = SymTensor::from_entries(4, 2, {{{0, 0, 0, 1}, 2.0}});
  CHECK(tensor_to_json(t).find("[1,1,1,2]") != std::string::npos);
  SymTensor p = parse_tensor_json(R"({"order":4,"dim":2,"entries":[{"idx":[1,1,1,2],"val":2.0}]})");
  CHECK(p.entry({0, 0, 0, 1}) == 2.0);
}

TEST_CASE("tensor JSON rejects bad input") {
  CHECK_THROWS_AS(parse_tensor_json("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_tensor_json(R"({"order":4,"dim":2})"), std::invalid_argument);
  // out of range (0 is not a valid 1-based index)
  CHECK_THROWS_AS(parse_tensor_json(R"({"order":4,"dim":2,"entries":[{"idx":[0,1,1,1],"val":1}]})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_tensor_json(R"({"order":4,"dim":2,"entries":[{"idx":[1,1,1,3],"val":1}]})"),
                  std::invalid_argument);
  // duplicate canonical tuple
  CHECK_THROWS_AS(
      parse_tensor_json(
          R"({"order":4,"dim":2,"entries":[{"idx":[1,1,1,2],"val":1},{"idx":[2,1,1,1],"val":2}]})"),
      std::invalid_argument);
  // odd order
  CHECK_THROWS_AS(parse_tensor_json(R"({"order":3,"dim":2,"entries":[]})"), std::invalid_argument);
}

TEST_CASE("atomic file write leaves no temp file behind") {
  namespace fs = std::filesystem;
  fs::path p = fs::temp_directory_path() / "teig_io_test.json";
  SymTensor t = generate_example(5, 5);
  save_tensor_file(p.string(), t);
  CHECK(fs::exists(p));
  CHECK(!fs::exists(p.string() + ".tmp"));
  SymTensor back = load_tensor_file(p.string());
  CHECK(back.entry_count() == t.entry_count());
  fs::remove(p);
  CHECK_THROWS_AS(load_tensor_file(p.string()), std::invalid_argument);
}
