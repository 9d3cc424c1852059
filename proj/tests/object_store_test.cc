/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <thread>

#include "minilake/error.h"
#include "minilake/object_store.h"
#include "test_util.h"

namespace minilake {
namespace {

using testing::CodeOf;
using testing::TempDir;

std::string HashOf(int n) {
  std::string h(64, '0');
  const std::string digits = std::to_string(n);
  h.replace(64 - digits.size(), digits.size(), digits);
  return h;
}

TEST(ObjectStoreTest, PutGetIsWriteOnce) {
  TempDir dir;
  ObjectStore store(dir.path(), {false});
  store.Put("a/b/c.bin", std::string("x\0y", 3));
  EXPECT_EQ(store.Get("a/b/c.bin"), std::string("x\0y", 3));
  EXPECT_TRUE(store.Exists("a/b/c.bin"));
  EXPECT_EQ(store.Stat("a/b/c.bin").size_bytes, 3u);
  EXPECT_EQ(CodeOf([&] { store.Put("a/b/c.bin", "other"); }), ErrorCode::kAlreadyExists);
  EXPECT_EQ(store.Get("a/b/c.bin"), std::string("x\0y", 3));
  EXPECT_EQ(CodeOf([&] { store.Get("missing"); }), ErrorCode::kNotFound);
}

TEST(ObjectStoreTest, RejectsMalformedKeys) {
  TempDir dir;
  ObjectStore store(dir.path(), {false});
  for (const char* key : {"", "/abs", "a//b", "a/../b", "./a", "a/", ".."}) {
    EXPECT_EQ(CodeOf([&] { store.Put(key, "x"); }), ErrorCode::kInvalidKey) << key;
  }
}

TEST(ObjectStoreTest, ListIsSortedAndPrefixed) {
  TempDir dir;
  ObjectStore store(dir.path(), {false});
  for (const char* key : {"t/b", "t/a/2", "t/a/1", "u/x", "t2"}) store.Put(key, "1");
  EXPECT_EQ(store.List("t/"), (std::vector<std::string>{"t/a/1", "t/a/2", "t/b"}));
  EXPECT_EQ(store.List("t"), (std::vector<std::string>{"t/a/1", "t/a/2", "t/b", "t2"}));
  EXPECT_TRUE(store.List("nothing/").empty());
  store.Delete("t/b");
  EXPECT_FALSE(store.Exists("t/b"));
  EXPECT_EQ(CodeOf([&] { store.Delete("t/b"); }), ErrorCode::kNotFound);
}

TEST(ObjectStoreTest, CasRefSemantics) {
  TempDir dir;
  ObjectStore store(dir.path(), {false});
  EXPECT_FALSE(store.ReadRef("refs/heads/main"));
  EXPECT_TRUE(store.CasRef("refs/heads/main", std::nullopt, HashOf(1)));
  EXPECT_FALSE(store.CasRef("refs/heads/main", std::nullopt, HashOf(2)));
  EXPECT_FALSE(store.CasRef("refs/heads/main", HashOf(3), HashOf(2)));
  EXPECT_TRUE(store.CasRef("refs/heads/main", HashOf(1), HashOf(2)));
  EXPECT_EQ(store.ReadRef("refs/heads/main"), HashOf(2));
  EXPECT_TRUE(store.CasRef("refs/heads/feature/x", std::nullopt, HashOf(5)));
  EXPECT_EQ(store.ListRefs(),
            (std::vector<std::string>{"refs/heads/feature/x", "refs/heads/main"}));
  EXPECT_EQ(CodeOf([&] { store.CasRef("heads/main", std::nullopt, HashOf(1)); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { store.CasRef("refs/heads/main", HashOf(2), "nothex"); }),
            ErrorCode::kInvalidArgument);
}

TEST(ObjectStoreTest, ConcurrentCasNeverLosesAnIncrement) {
  TempDir dir;
  ObjectStore store(dir.path(), {false});
  ASSERT_TRUE(store.CasRef("refs/heads/counter", std::nullopt, HashOf(0)));
  constexpr int kThreads = 6;
  constexpr int kIncrements = 40;
  std::vector<std::thread> threads;
  for (int t = 0; t < kThreads; ++t) {
    threads.emplace_back([&] {
      for (int i = 0; i < kIncrements; ++i) {
        for (;;) {
          const std::string current = *store.ReadRef("refs/heads/counter");
          const int n = std::stoi(current);
          if (store.CasRef("refs/heads/counter", current, HashOf(n + 1))) break;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(store.ReadRef("refs/heads/counter"), HashOf(kThreads * kIncrements));
}

TEST(ObjectStoreTest, ConcurrentPutOfOneKeyHasOneWinner) {
  TempDir dir;
  ObjectStore store(dir.path(), {false});
  std::atomic<int> winners{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      try {
        store.Put("contested", "writer" + std::to_string(t));
        ++winners;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::kAlreadyExists);
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(winners.load(), 1);
  EXPECT_EQ(store.Get("contested").rfind("writer", 0), 0u);
}

TEST(ObjectStoreTest, SurvivesReopen) {
  TempDir dir;
  {
    ObjectStore store(dir.path());
    store.Put("k", "v");
    ASSERT_TRUE(store.CasRef("refs/heads/main", std::nullopt, HashOf(9)));
  }
  ObjectStore reopened(dir.path());
  EXPECT_EQ(reopened.Get("k"), "v");
  EXPECT_EQ(reopened.ReadRef("refs/heads/main"), HashOf(9));
}

TEST(ObjectStoreTest, RandomTokensAreDistinctHex) {
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::string token = RandomToken();
    ASSERT_EQ(token.size(), 32u);
    EXPECT_EQ(token.find_first_not_of("0123456789abcdef"), std::string::npos);
    EXPECT_TRUE(seen.insert(token).second);
  }
}

}  // namespace
}  // namespace minilake
