#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "tomofuse/manifest.hpp"
#include "tomofuse/volume.hpp"

using namespace tomofuse;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("tomofuse_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write_pgm8(const fs::path& p, std::size_t w, std::size_t h, const std::vector<unsigned char>& px) {
    std::ofstream out(p, std::ios::binary);
    out << "P5\n# comment\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

}  // namespace

TEST(Normalize, HandExamples) {
    Tensor a({1, 1, 3}, std::vector<float>{0, 128, 255});
    Tensor n = normalize(a);
    EXPECT_FLOAT_EQ(n[0], 0.0f);
    EXPECT_NEAR(n[1], 128.0 / 255.0, 1e-7);
    EXPECT_FLOAT_EQ(n[2], 1.0f);

    Tensor b({3}, std::vector<float>{10, 20, 30});
    Tensor m = normalize(b);
    EXPECT_EQ(m.buffer(), (std::vector<float>{0.0f, 0.5f, 1.0f}));
}

TEST(Normalize, RangeAndIdempotence) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<float> u(-100.0f, 400.0f);
    for (int trial = 0; trial < 20; ++trial) {
        Tensor t({4, 5, 6});
        for (float& v : t.data()) v = u(rng);
        Tensor n = normalize(t);
        EXPECT_EQ(*std::min_element(n.data().begin(), n.data().end()), 0.0f);
        EXPECT_EQ(*std::max_element(n.data().begin(), n.data().end()), 1.0f);
        Tensor nn = normalize(n);
        for (std::size_t i = 0; i < n.size(); ++i) EXPECT_NEAR(nn[i], n[i], 1e-6);
    }
}

TEST(Normalize, ConstantVolumeFails) {
    try {
        normalize(Tensor({2, 3, 3}, 4.0f));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ConstantVolume);
    }
}

TEST(VolumeType, RequiresRankThree) {
    EXPECT_THROW(Volume(Tensor({4, 4}), View::CC, Label::Negative, "x"), Error);
    Volume v(Tensor({2, 3, 4}, 1.0f), View::MLO, Label::Benign, "v");
    EXPECT_EQ(v.depth(), 2u);
    EXPECT_EQ(v.slice(1).shape(), (Shape{3, 4}));
    EXPECT_EQ(binary_target(Label::Benign), 0);
    EXPECT_EQ(binary_target(Label::Malignant), 1);
}

TEST(Pgm, DirectoryOfSlicesLoadsInOrder) {
    auto dir = temp_dir("pgm") / "vol_a";
    fs::create_directories(dir);
    write_pgm8(dir / "001.pgm", 3, 2, {1, 2, 3, 4, 5, 6});
    write_pgm8(dir / "000.pgm", 3, 2, {0, 0, 0, 0, 0, 255});
    Tensor t = load_raw_slices(dir);
    EXPECT_EQ(t.shape(), (Shape{2, 2, 3}));
    EXPECT_EQ(t.at(0, 1, 2), 255.0f);
    EXPECT_EQ(t.at(1, 0, 1), 2.0f);
}

TEST(Pgm, SixteenBitIsBigEndian) {
    auto dir = temp_dir("pgm16");
    {
        std::ofstream out(dir / "a.pgm", std::ios::binary);
        out << "P5 2 1 65535\n";
        const unsigned char px[] = {0x01, 0x02, 0xff, 0x00};
        out.write(reinterpret_cast<const char*>(px), 4);
    }
    Tensor t = read_pgm(dir / "a.pgm");
    EXPECT_EQ(t[0], 258.0f);
    EXPECT_EQ(t[1], 65280.0f);
}

TEST(Manifest, RoundtripAndLookup) {
    auto dir = temp_dir("manifest");
    fs::create_directories(dir / "volumes");
    Tensor raw({2, 2, 2}, std::vector<float>{0, 1, 2, 3, 4, 5, 6, 7});
    write_tensor(raw, dir / "volumes/vol_0001.ten");
    DatasetManifest m;
    m.entries.push_back({"volumes/vol_0001.ten", Label::Malignant, View::MLO, Split::Test});
    write_manifest(m, dir / "manifest.csv");
    DatasetManifest back = read_manifest(dir / "manifest.csv");
    ASSERT_EQ(back.entries.size(), 1u);
    EXPECT_EQ(back.entries[0].label, Label::Malignant);
    EXPECT_EQ(back.entries[0].view, View::MLO);
    EXPECT_EQ(back.entries[0].split, Split::Test);
    EXPECT_EQ(back.entries[0].id(), "vol_0001");
    EXPECT_EQ(back.select(Split::Train).size(), 0u);
    Volume v = load_volume(back, back.entries[0]);
    EXPECT_FLOAT_EQ(v.slices.at(1, 1, 1), 1.0f);
    EXPECT_NEAR(v.slices.at(0, 0, 1), 1.0 / 7.0, 1e-7);
}

TEST(Manifest, RejectsDuplicatesAndBadRows) {
    auto dir = temp_dir("manifest_bad");
    {
        std::ofstream out(dir / "m.csv");
        out << "path,label,view,split\na.ten,negative,CC,train\na.ten,negative,CC,test\n";
    }
    EXPECT_THROW(read_manifest(dir / "m.csv"), Error);
    {
        std::ofstream out(dir / "m.csv");
        out << "path,label,view,split\na.ten,cancer,CC,train\n";
    }
    EXPECT_THROW(read_manifest(dir / "m.csv"), Error);
}
