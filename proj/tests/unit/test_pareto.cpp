#include <algorithm>
#include <filesystem>

#include <gtest/gtest.h>

#include "dsc/error.hpp"
#include "dsc/pareto.hpp"
#include "dsc/random.hpp"
#include "oracles.hpp"

using namespace dsc;

namespace {

std::vector<ParetoPoint> random_archive(std::size_t n, std::uint64_t seed)
{
    Rng rng(seed);
    std::uniform_int_distribution<int> c(1, 30);
    std::uniform_int_distribution<int> f(0, 40);
    std::vector<ParetoPoint> out;
    for (std::size_t i = 0; i < n; ++i) {
        // coarse grid so ties and duplicates actually occur
        out.push_back({c(rng), f(rng) / 40.0, "e" + std::to_string(i % 37)});
    }
    return out;
}

} // namespace

TEST(ParetoFront, SingleCandidate)
{
    const std::vector<ParetoPoint> a{{5, 0.4, "x"}};
    EXPECT_EQ(pareto_front(a), a);
}

TEST(ParetoFront, SectionExample)
{
    const std::vector<ParetoPoint> a{{9, 0.76, "a"}, {13, 0.78, "b"}, {14, 0.77, "c"}};
    const std::vector<ParetoPoint> want{{9, 0.76, "a"}, {13, 0.78, "b"}};
    EXPECT_EQ(pareto_front(a), want);
}

TEST(ParetoFront, EmptyThrows)
{
    try {
        (void)pareto_front({});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EmptyArchive);
    }
}

TEST(ParetoFront, MatchesOracleAndIsStable)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto archive = random_archive(200, seed);
        const auto front = pareto_front(archive);
        EXPECT_EQ(front, oracle::pareto_oracle(archive));
        for (std::size_t i = 1; i < front.size(); ++i) {
            EXPECT_LT(front[i - 1].complexity, front[i].complexity);
            EXPECT_LT(front[i - 1].f1, front[i].f1);
        }
        Rng rng(seed);
        std::shuffle(archive.begin(), archive.end(), rng);
        archive.insert(archive.end(), archive.begin(), archive.begin() + 50);
        EXPECT_EQ(pareto_front(archive), front);
    }
}

TEST(Elbow, Examples)
{
    const std::vector<ParetoPoint> front{{9, 0.76, "a"}, {13, 0.78, "b"}};
    EXPECT_EQ(elbow(front, 0.004).complexity, 13);
    EXPECT_EQ(elbow(front, 0.01).complexity, 9);
    EXPECT_EQ(elbow({front[0]}, 0.5).complexity, 9);
    EXPECT_THROW((void)elbow({}, 0.1), Error);
}

TEST(Elbow, AlwaysOnFront)
{
    const auto front = pareto_front(random_archive(200, 99));
    for (double g : {0.0, 0.001, 0.01, 0.1, 1.0}) {
        const auto e = elbow(front, g);
        EXPECT_NE(std::find(front.begin(), front.end(), e), front.end());
    }
}

TEST(Archive, RoundTrip)
{
    const std::vector<ParetoPoint> a{{9, 0.76, "+ x0 C=1.5"}, {13, 0.123456789012345678, "* a b"}};
    const auto path = (std::filesystem::temp_directory_path() / "dsc_archive_test.tsv").string();
    write_archive(a, path);
    EXPECT_EQ(read_archive(path), a);
    std::filesystem::remove(path);
}
