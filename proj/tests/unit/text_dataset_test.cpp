/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#include <gtest/gtest.h>

#include <fstream>

#include "sqlrl/dataset.hpp"
#include "sqlrl/error.hpp"
#include "sqlrl/text.hpp"
#include "testkit.hpp"

using namespace sqlrl;

TEST(Text, TrimAndNormalize)
{
    EXPECT_EQ(trim("  a b \n"), "a b");
    EXPECT_EQ(normalize_whitespace("SELECT\n\t a ,  b\n FROM t  "), "SELECT a , b FROM t");
    EXPECT_EQ(normalize_whitespace(""), "");
}

TEST(Text, FillTemplateKeepsForeignBraces)
{
    EXPECT_EQ(fill_template("{a} {b} {c} {{x}}", {{"a", "1"}, {"b", "{a}"}}), "1 {a} {c} {{x}}");
}

TEST(Text, FillTemplateRequiresEverySlot)
{
    try {
        (void)fill_template("hello {name}", {{"name", "x"}, {"missing", "y"}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingSlot);
    }
}

TEST(Text, FencedBlocks)
{
    const auto fences = fenced_blocks("a\n```SQL\nSELECT 1\n```\n```\nplain\n```\n```sql\nunterminated");
    ASSERT_EQ(fences.size(), 2u);
    EXPECT_EQ(fences[0].lang, "sql");
    EXPECT_EQ(fences[0].body, "SELECT 1");
    EXPECT_EQ(fences[1].lang, "");
    EXPECT_EQ(fences[1].body, "plain");
}

TEST(Dataset, ReadsSamplesRelativeToFile)
{
    testkit::TempDir dir;
    std::filesystem::create_directories(dir / "data");
    std::ofstream(dir / "data" / "d.jsonl")
        << R"({"id": 7, "question": "q", "evidence": "", "db_path": "db/x.sqlite", "gold_sql": "SELECT 1"})" << "\n\n"
        << R"({"id": "b", "question": "q2", "evidence": "e", "db_path": "/abs/y.sqlite", "gold_sql": "SELECT 2", "domain": "retail"})"
        << "\n";
    const auto samples = read_samples(dir / "data" / "d.jsonl");
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[0].id, "7");
    EXPECT_FALSE(samples[0].evidence.has_value());
    EXPECT_EQ(samples[0].db.path(), dir / "data" / "db/x.sqlite");
    EXPECT_EQ(samples[1].db.path(), "/abs/y.sqlite");
    EXPECT_EQ(samples[1].domain, "retail");
}

TEST(Dataset, RejectsDuplicateIdsAndBadLines)
{
    testkit::TempDir dir;
    std::ofstream(dir / "dup.jsonl") << R"({"id": 1, "question": "q", "db_path": "a", "gold_sql": "s"})" << "\n"
                                     << R"({"id": "1", "question": "q", "db_path": "a", "gold_sql": "s"})" << "\n";
    EXPECT_THROW((void)read_samples(dir / "dup.jsonl"), Error);
    std::ofstream(dir / "bad.jsonl") << "{\"id\": 1,\n";
    try {
        (void)read_jsonl(dir / "bad.jsonl");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos) << e.what();
    }
}

TEST(Dataset, RecordCarriesDisposition)
{
    Sample s;
    s.id = "x";
    s.question = "q";
    s.db = DatabaseRef("/tmp/x.sqlite");
    s.gold_sql = "SELECT 1";
    const auto j = record_to_json(s, CurationRecord::dropped("x", DropReason::GoldTimeout, "slow"));
    EXPECT_EQ(j.at("disposition"), "Dropped");
    EXPECT_EQ(j.at("reason"), "GoldTimeout");
    EXPECT_EQ(j.at("gold_sql"), "SELECT 1");
}
