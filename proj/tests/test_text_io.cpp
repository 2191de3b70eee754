#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "readlevel/io.hpp"
#include "readlevel/text.hpp"

using namespace readlevel;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& contents) {
  const fs::path path = fs::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return path;
}

}  // namespace

// ---------------------------------------------------------------------------
// normalize_text
// ---------------------------------------------------------------------------

TEST(NormalizeText, ArabicGreetingExample) {
  // "  مرحبا  بكم!!!  " -> "مرحبا بكم!"
  EXPECT_EQ(normalize_text("  مرحبا  "
                           "بكم!!!  "),
            "مرحبا بكم!");
}

TEST(NormalizeText, EmptyStringStaysEmpty) {
  EXPECT_EQ(normalize_text(""), "");
  EXPECT_EQ(normalize_text("   \t\n  "), "");
}

TEST(NormalizeText, CollapsesOnlyIdenticalPunctuationRuns) {
  EXPECT_EQ(normalize_text("what????"), "what?");
  EXPECT_EQ(normalize_text("hey!!!"), "hey!");
  EXPECT_EQ(normalize_text("a?!?!b"), "a?!?!b");  // mixed run untouched
  EXPECT_EQ(normalize_text("dots..... end"), "dots. end");
}

TEST(NormalizeText, WhitespaceBreaksPunctuationRuns) {
  EXPECT_EQ(normalize_text("!! !!"), "! !");
}

TEST(NormalizeText, UnicodeWhitespaceBecomesAsciiSpace) {
  EXPECT_EQ(normalize_text("a  b\tc"), "a b c");
}

TEST(NormalizeText, ComposesToNfc) {
  // decomposed e + combining acute -> precomposed é
  EXPECT_EQ(normalize_text("é"), "é");
}

TEST(NormalizeText, ArabicPunctuationCollapses) {
  EXPECT_EQ(normalize_text("نعم؟؟؟"),
            "نعم؟");
}

TEST(NormalizeText, IdempotentOnRandomInputs) {
  const std::vector<std::string> alphabet{
      " ",      "\t",     " ", " ", "!",      "?",     ".",
      "؟", "،", "a",      "b",      "م", "ر", "e",
      "́", "ٔ", "ا", "1",      "é"};
  std::mt19937 rng(5);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> length(0, 40);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const int n = length(rng);
    for (int i = 0; i < n; ++i) s += alphabet[pick(rng)];
    const std::string once = normalize_text(s);
    EXPECT_EQ(normalize_text(once), once) << "input: " << s;
  }
}

TEST(NormalizeText, TotalOnInvalidUtf8) {
  const std::string junk = "ab\xff\xfe cd";
  const std::string once = normalize_text(junk);
  EXPECT_EQ(normalize_text(once), once);
}

// ---------------------------------------------------------------------------
// gold TSV
// ---------------------------------------------------------------------------

TEST(LoadGold, ParsesWellFormedRows) {
  const auto path = temp_file("rl_gold_ok.tsv",
                              "ABC0001-S01\tsome text\t12\n"
                              "ABC0001-S02\t\t1\n"
                              "ABC0002-S01\tmore\t19\n");
  const auto records = load_gold(path, barec_scale());
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].sentence_id, "ABC0001-S01");
  EXPECT_EQ(records[0].level, 12);
  EXPECT_EQ(records[1].text, "");
  fs::remove(path);
}

TEST(LoadGold, RejectsOutOfRangeLabel) {
  const auto path = temp_file("rl_gold_range.tsv", "ABC0001-S01\tx\t20\n");
  EXPECT_THROW(load_gold(path, barec_scale()), ValidationError);
  fs::remove(path);
}

TEST(LoadGold, RejectsDuplicateIdsNamingThem) {
  const auto path = temp_file("rl_gold_dup.tsv",
                              "ABC0001-S01\tx\t3\nABC0001-S01\ty\t4\n");
  try {
    load_gold(path, barec_scale());
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ABC0001-S01"), std::string::npos);
  }
  fs::remove(path);
}

TEST(LoadGold, NamesLineNumberOnMalformedRow) {
  const auto path =
      temp_file("rl_gold_bad.tsv", "ABC0001-S01\tx\t3\nbroken line\n");
  try {
    load_gold(path, barec_scale());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  fs::remove(path);
}

TEST(LoadGold, ValidatesAgainstRequestedScale) {
  const auto path = temp_file("rl_gold_samer.tsv", "XYZ0001-S01\tx\t7\n");
  EXPECT_THROW(load_gold(path, samer_scale()), ValidationError);
  fs::remove(path);
}

// ---------------------------------------------------------------------------
// heads JSONL
// ---------------------------------------------------------------------------

namespace {

std::string uniform_probs_line(const std::string& id) {
  std::string probs = "[";
  for (int i = 0; i < 19; ++i)
    probs += (i ? "," : "") + std::string("0.052631578947368418");
  probs += "]";
  return R"({"id":")" + id + R"(","model":"m1","kind":"classification","probs":)" +
         probs + "}\n";
}

}  // namespace

TEST(LoadHeads, AcceptsAllThreeKinds) {
  std::string contents = uniform_probs_line("A120093-S01");
  contents += R"({"id":"A120093-S02","model":"m2","kind":"regression","score":11.4})"
              "\n";
  contents +=
      R"({"id":"A120093-S03","model":"m3","kind":"ordinal","thresholds":[1,1,1,1,1,1,1,0.9,0.2,0,0,0,0,0,0,0,0,0]})"
      "\n";
  const auto path = temp_file("rl_heads_ok.jsonl", contents);
  const auto heads = load_heads(path);
  ASSERT_EQ(heads.size(), 3u);
  EXPECT_EQ(heads[0].kind, HeadKind::classification);
  EXPECT_EQ(heads[1].kind, HeadKind::regression);
  EXPECT_DOUBLE_EQ(heads[1].score, 11.4);
  EXPECT_EQ(heads[2].threshold_probs.size(), 18u);
  fs::remove(path);
}

TEST(LoadHeads, RejectsUnnormalizedProbs) {
  std::string probs = "[0.8";
  for (int i = 1; i < 19; ++i) probs += ",0";
  probs += "]";
  const auto path = temp_file(
      "rl_heads_sum.jsonl",
      R"({"id":"A000001-S01","model":"m","kind":"classification","probs":)" +
          probs + "}\n");
  EXPECT_THROW(load_heads(path), ValidationError);
  fs::remove(path);
}

TEST(LoadHeads, RejectsWrongVectorLengths) {
  std::string probs = "[1";
  for (int i = 1; i < 17; ++i) probs += ",0";
  probs += "]";  // 17 thresholds, need 18
  const auto path = temp_file(
      "rl_heads_len.jsonl",
      R"({"id":"A000001-S01","model":"m","kind":"ordinal","thresholds":)" +
          probs + "}\n");
  EXPECT_THROW(load_heads(path), ValidationError);
  fs::remove(path);
}

TEST(LoadHeads, RejectsNonFiniteScore) {
  // overflow is caught by the JSON parser itself
  const auto path = temp_file(
      "rl_heads_nan.jsonl",
      R"({"id":"A000001-S01","model":"m","kind":"regression","score":1e999})"
      "\n");
  EXPECT_THROW(load_heads(path), ParseError);
  fs::remove(path);
}

TEST(LoadHeads, RejectsNonFiniteProbs) {
  HeadOutput h;
  h.sentence_id = "A000001-S01";
  h.model_id = "m";
  h.kind = HeadKind::classification;
  h.class_probs.assign(19, 0.0);
  h.class_probs[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(detail::validate_head(h, "test"), ValidationError);
  h.class_probs[0] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(detail::validate_head(h, "test"), ValidationError);
}

TEST(LoadHeads, RejectsMultiplePayloads) {
  const auto path = temp_file(
      "rl_heads_two.jsonl",
      R"({"id":"A000001-S01","model":"m","kind":"regression","score":3,"thresholds":[]})"
      "\n");
  EXPECT_THROW(load_heads(path), ValidationError);
  fs::remove(path);
}

TEST(LoadHeads, BadJsonNamesLine) {
  const auto path = temp_file("rl_heads_json.jsonl", "{not json\n");
  try {
    load_heads(path);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
  fs::remove(path);
}

TEST(SaveHeads, LoadedHeadsRoundTripUnchanged) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<HeadOutput> heads;
  for (int i = 0; i < 40; ++i) {
    HeadOutput h;
    h.sentence_id = "RND" + std::to_string(1000 + i) + "-S01";
    h.model_id = "m" + std::to_string(i % 3);
    switch (i % 3) {
      case 0: {
        h.kind = HeadKind::classification;
        h.class_probs.resize(19);
        double sum = 0.0;
        for (double& p : h.class_probs) sum += (p = unit(rng) + 1e-3);
        for (double& p : h.class_probs) p /= sum;
        break;
      }
      case 1:
        h.kind = HeadKind::regression;
        h.score = unit(rng) * 25.0 - 3.0;
        break;
      default:
        h.kind = HeadKind::ordinal;
        h.threshold_probs.resize(18);
        for (double& p : h.threshold_probs) p = unit(rng);
        break;
    }
    heads.push_back(std::move(h));
  }

  const fs::path path = fs::temp_directory_path() / "rl_heads_roundtrip.jsonl";
  save_heads(path, heads);
  const auto loaded = load_heads(path);
  save_heads(path, loaded);
  const auto reloaded = load_heads(path);
  ASSERT_EQ(loaded.size(), heads.size());
  EXPECT_EQ(loaded, reloaded);  // field-for-field
  fs::remove(path);
}

// ---------------------------------------------------------------------------
// doc keys & prediction rows
// ---------------------------------------------------------------------------

TEST(DocKey, PrefixRule) {
  EXPECT_EQ(doc_key("ABC1234-S05"), "ABC1234");
  EXPECT_EQ(doc_key("XYZ0001"), "XYZ0001");
}

TEST(DocKey, ShortIdThrows) {
  EXPECT_THROW(doc_key("AB12"), ValidationError);
}

TEST(DocKey, GroupingPartitionsSentences) {
  std::vector<std::string> ids;
  for (int d = 0; d < 7; ++d)
    for (int s = 0; s < 4; ++s)
      ids.push_back("DOC" + std::to_string(1000 + d) + "-S" + std::to_string(s));
  std::map<std::string, int> sizes;
  for (const auto& id : ids) ++sizes[doc_key(id)];
  std::size_t total = 0;
  for (const auto& [doc, size] : sizes) total += size;
  EXPECT_EQ(sizes.size(), 7u);
  EXPECT_EQ(total, ids.size());
}

TEST(PredictionTsv, AcceptsTwoAndThreeColumnRows) {
  const auto path = temp_file("rl_pred.tsv",
                              "AAA0001-S01\t12\n"
                              "AAA0001-S02\t11.25\t11\n");
  const auto rows = load_prediction_tsv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_DOUBLE_EQ(rows[0].value, 12.0);
  EXPECT_EQ(rows[1].level, 11);
  EXPECT_DOUBLE_EQ(rows[1].value, 11.25);
  fs::remove(path);
}

TEST(PredictionTsv, RejectsDuplicateIds) {
  const auto path =
      temp_file("rl_pred_dup.tsv", "AAA0001-S01\t12\nAAA0001-S01\t11\n");
  EXPECT_THROW(load_prediction_tsv(path), ValidationError);
  fs::remove(path);
}

TEST(LevelTsv, AcceptsPredictionAndGoldShapedRows) {
  const auto path = temp_file("rl_level.tsv",
                              "AAA0001-S01\t12\n"
                              "AAA0001-S02\t11.25\t11\n"
                              "AAA0001-S03\tsome text\t4\n");
  const auto rows = load_level_tsv(path);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].second, 12);
  EXPECT_EQ(rows[1].second, 11);
  EXPECT_EQ(rows[2].second, 4);
  fs::remove(path);
}

TEST(LevelTsv, StillRejectsNonIntegerLevels) {
  const auto path = temp_file("rl_level_bad.tsv", "AAA0001-S01\ttext\tx\n");
  EXPECT_THROW(load_level_tsv(path), ParseError);
  fs::remove(path);
}
