// Copyright 2026 The adsim Authors
// SPDX-License-Identifier: Apache-2.0

#include "ads/broker.hpp"
#include "helpers.hpp"

#include <doctest.h>

#include <random>
#include <stdexcept>

using namespace ads;
using ads::testing::item;

TEST_CASE("an item that exactly fills the store is accepted")
{
    LocalStore s(5);
    CHECK(s.store(item(1, "a", 5), false) == StoreResult::accepted);
    CHECK(s.used() == 5);
    CHECK(s.free_capacity() == 0);
}

TEST_CASE("an item that does not fit is rejected and changes nothing")
{
    LocalStore s(5);
    s.store(item(1, "a", 3), false);
    CHECK(s.store(item(2, "a", 3), false) == StoreResult::rejected);
    CHECK(s.used() == 3);
    CHECK_FALSE(s.contains(2));
}

TEST_CASE("storing the same id twice replaces rather than duplicates")
{
    LocalStore s(10);
    s.store(item(1, "a", 2), false);
    s.store(item(1, "a", 2), true);
    CHECK(s.used() == 2);
    CHECK(s.items().size() == 1);
    CHECK(s.find(1)->replica);
    // A bigger replacement is sized against the space the old copy frees.
    CHECK(s.store(item(1, "a", 10), false) == StoreResult::accepted);
    CHECK(s.used() == 10);
}

TEST_CASE("retrieve skips expired items")
{
    LocalStore s(10);
    auto it = item(1, "a", 1, 1, 10);
    it.created_at = 0;
    s.store(it, false);
    CHECK(s.retrieve({}, 10).size() == 1);
    CHECK(s.retrieve({}, 11).empty());
}

TEST_CASE("retrieve with a tag filter equals a brute-force filter")
{
    std::mt19937_64 rng(5);
    const char* tags[] = {"news", "food", "traffic"};
    LocalStore s(1000);
    std::vector<InfoItem> all;
    for (ItemId id = 1; id <= 60; ++id) {
        auto it = item(id, tags[rng() % 3], 1 + rng() % 3);
        if (rng() % 4 == 0) {
            it.lifetime = rng() % 50;
        }
        all.push_back(it);
        s.store(it, false);
    }
    for (const char* t : tags) {
        for (SimTime now : {0, 25, 100}) {
            Predicate p;
            p.type_tag = t;
            std::set<ItemId> want;
            for (const auto& it : all) {
                if (it.type_tag == t && !it.expired_at(now)) {
                    want.insert(it.id);
                }
            }
            std::set<ItemId> got;
            for (const auto& it : s.retrieve(p, now)) {
                got.insert(it.id);
            }
            CHECK(got == want);
        }
    }
}

TEST_CASE("predicates match by tag and id")
{
    Predicate empty;
    CHECK(empty.matches(item(3, "x")));
    Predicate ids;
    ids.item_ids = {1, 2};
    CHECK(ids.matches(item(2, "x")));
    CHECK_FALSE(ids.matches(item(3, "x")));
    Predicate both;
    both.type_tag = "x";
    both.item_ids = {2};
    CHECK(both.matches(item(2, "x")));
    CHECK_FALSE(both.matches(item(2, "y")));
}

TEST_CASE("free capacity stays capacity minus the sizes held")
{
    std::mt19937_64 rng(11);
    LocalStore s(40);
    std::map<ItemId, std::uint32_t> held;
    for (int step = 0; step < 500; ++step) {
        ItemId id = rng() % 20;
        if (rng() % 3 == 0) {
            if (s.remove(id)) {
                held.erase(id);
            }
        } else {
            auto it = item(id, "t", 1 + rng() % 6);
            if (s.store(it, false) == StoreResult::accepted) {
                held[id] = it.size;
            }
        }
        std::uint32_t sum = 0;
        for (auto [k, v] : held) {
            sum += v;
        }
        REQUIRE(s.used() == sum);
        REQUIRE(s.used() <= s.capacity());
        REQUIRE(s.free_capacity() == s.capacity() - sum);
    }
}

TEST_CASE("sweep drops exactly the expired items")
{
    LocalStore s(10);
    auto a = item(1, "a", 1, 1, 5);
    auto b = item(2, "a", 1, 1, 50);
    auto c = item(3, "a");
    for (const auto& it : {a, b, c}) {
        s.store(it, false);
    }
    auto gone = s.sweep(20);
    REQUIRE(gone.size() == 1);
    CHECK(gone[0].id == 1);
    CHECK(s.used() == 2);
    CHECK(s.contains(2));
    CHECK(s.contains(3));
}

TEST_CASE("take_assigned leaves local data in place")
{
    LocalStore s(10);
    s.store(item(1), false, true);
    s.store(item(2), true, true);
    s.store(item(3), false, false);
    CHECK(s.replica_ids() == std::vector<ItemId>{2});
    auto taken = s.take_assigned();
    CHECK(taken.size() == 2);
    CHECK_FALSE(s.holds_assigned());
    CHECK(s.contains(3));
    CHECK(s.used() == 1);
}

TEST_CASE("item validation")
{
    CHECK_NOTHROW(item(1, "a", 1, 2).validate());
    auto high = item(1, "a", 1, 1);
    high.importance = Importance::high;
    CHECK_THROWS_AS(high.validate(), std::invalid_argument);
    auto zero = item(1, "a", 0);
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);
    auto nodeg = item(1, "a", 1, 0);
    CHECK_THROWS_AS(nodeg.validate(), std::invalid_argument);
}
