#include "support.hpp"

#include "lact/errors.hpp"
#include "lact/io.hpp"
#include "lact/projector.hpp"

#include <doctest.h>
#include <png.h>

#include <cstring>

using namespace lact;
using namespace lact::io;

namespace {

Image sample_image(int n, std::uint64_t seed)
{
    const auto v = test::random_values(static_cast<std::size_t>(n) * n, seed, -2.0, 2.0);
    Image img = test::to_image(v, n);
    img.values[0] = -0.0f;
    img.values[1] = 1e-38f;  // subnormal-adjacent values survive untouched
    return img;
}

Sinogram sample_sinogram(std::uint64_t seed)
{
    auto g = FanBeamGeometry::desk_small();
    g.num_angles = 37;
    g.angle_start_deg = 12.5;
    Sinogram s(g);
    const auto v = test::random_values(s.values.size(), seed);
    std::transform(v.begin(), v.end(), s.values.begin(), [](double x) { return static_cast<float>(x); });
    return s;
}

// Flips random bytes, truncates or extends; only typed errors may escape.
template <class Decode>
void fuzz(const std::vector<std::uint8_t>& valid, Decode decode, std::uint64_t seed, int trials)
{
    Rng rng(seed);
    int rejected = 0;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::uint8_t> b = valid;
        const int kind = uniform_int(rng, 0, 2);
        if (kind == 0) {
            const int flips = uniform_int(rng, 1, 4);
            for (int i = 0; i < flips; ++i) {
                // Bias mutations toward the header where the structure lives.
                const int limit = uniform_int(rng, 0, 1) ? std::min<int>(64, static_cast<int>(b.size()) - 1)
                                                         : static_cast<int>(b.size()) - 1;
                b[static_cast<std::size_t>(uniform_int(rng, 0, limit))] = static_cast<std::uint8_t>(uniform_int(rng, 0, 255));
            }
        } else if (kind == 1) {
            b.resize(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(b.size()) - 1)));
        } else {
            b.push_back(static_cast<std::uint8_t>(uniform_int(rng, 0, 255)));
        }
        try {
            decode(b);
        } catch (const lact::Error&) {
            ++rejected;
        }
    }
    CHECK(rejected > 0);
}

std::vector<std::uint8_t> decode_png_gray(const std::vector<std::uint8_t>& bytes, int& w, int& h)
{
    png_image img;
    std::memset(&img, 0, sizeof img);
    img.version = PNG_IMAGE_VERSION;
    REQUIRE(png_image_begin_read_from_memory(&img, bytes.data(), bytes.size()));
    img.format = PNG_FORMAT_GRAY;
    std::vector<std::uint8_t> px(PNG_IMAGE_SIZE(img));
    REQUIRE(png_image_finish_read(&img, nullptr, px.data(), 0, nullptr));
    w = static_cast<int>(img.width);
    h = static_cast<int>(img.height);
    return px;
}

} // namespace

TEST_CASE("image round trip is bitwise lossless")
{
    const Image img = sample_image(17, 1);
    const auto bytes = encode_image(img);
    const Image back = decode_image(bytes);
    REQUIRE(back.size == 17);
    CHECK(std::memcmp(back.values.data(), img.values.data(), img.values.size() * sizeof(float)) == 0);

    const auto dir = test::scratch_dir("io_rt");
    write_image(dir / "a.laim", img);
    CHECK(read_image(dir / "a.laim").values == img.values);
    CHECK(read_file(dir / "a.laim") == bytes);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "LAIM");
}

TEST_CASE("sinogram round trip, probe and geometry check")
{
    const Sinogram s = sample_sinogram(2);
    const auto dir = test::scratch_dir("io_sino");
    write_sinogram(dir / "s.lasg", s);
    const Sinogram back = read_sinogram(dir / "s.lasg");
    CHECK(back.geometry == s.geometry);
    CHECK(std::memcmp(back.values.data(), s.values.data(), s.values.size() * sizeof(float)) == 0);
    CHECK(probe_sinogram(dir / "s.lasg") == s.geometry);
    CHECK_NOTHROW(read_sinogram(dir / "s.lasg", s.geometry));
    auto other = s.geometry;
    other.source_to_center += 1.0;
    CHECK_THROWS_AS(read_sinogram(dir / "s.lasg", other), GeometryError);
}

TEST_CASE("distinct typed errors for bad files")
{
    const auto bytes = encode_image(sample_image(8, 3));

    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(decode_image(truncated), TruncatedError);

    auto magic = bytes;
    magic[0] = 'X';
    try {
        decode_image(magic);
        FAIL("wrong magic accepted");
    } catch (const MagicError& e) {
        CHECK(e.expected() == "LAIM");
        CHECK(e.found() == "XAIM");
    }

    auto version = bytes;
    version[4] = 9;
    CHECK_THROWS_AS(decode_image(version), VersionError);

    auto extra = bytes;
    extra.push_back(0);
    CHECK_THROWS_AS(decode_image(extra), DataError);

    Image bad = sample_image(4, 7);
    bad.values[5] = std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(decode_image(encode_image(bad)), DataError);

    CHECK_THROWS_AS(decode_sinogram(bytes), MagicError);
    CHECK_THROWS_AS(read_image(test::scratch_dir("io_missing") / "nope.laim"), DataError);
}

TEST_CASE("fuzzed headers never crash the readers")
{
    fuzz(encode_image(sample_image(6, 4)), [](const auto& b) { decode_image(b); }, 5, 3000);
    fuzz(encode_sinogram(sample_sinogram(5)), [](const auto& b) { decode_sinogram(b); }, 6, 3000);
}

TEST_CASE("view export")
{
    Image flat(8);
    std::fill(flat.values.begin(), flat.values.end(), 0.5f);
    const auto pgm = encode_view(flat, ViewMode::pgm16, {0.0, 1.0});
    const std::string header = "P5\n8 8\n65535\n";
    REQUIRE(pgm.size() == header.size() + 2 * 64);
    CHECK(std::string(pgm.begin(), pgm.begin() + static_cast<std::ptrdiff_t>(header.size())) == header);
    for (std::size_t i = header.size(); i < pgm.size(); i += 2)
        CHECK((pgm[i] << 8 | pgm[i + 1]) == 32768);
    CHECK(encode_view(flat, ViewMode::pgm16, {0.0, 1.0}) == pgm);

    const auto png = encode_view(flat, ViewMode::png8, {0.0, 1.0});
    CHECK(encode_view(flat, ViewMode::png8, {0.0, 1.0}) == png);
    int w = 0, h = 0;
    const auto px = decode_png_gray(png, w, h);
    CHECK(w == 8);
    CHECK(h == 8);
    CHECK(std::all_of(px.begin(), px.end(), [](std::uint8_t v) { return v == 128; }));

    Image ramp(4);
    for (int i = 0; i < 16; ++i)
        ramp.values[static_cast<std::size_t>(i)] = static_cast<float>(i) / 15.0f * 2.0f - 0.5f;
    const auto rp = decode_png_gray(encode_view(ramp, ViewMode::png8, {0.0, 1.0}), w, h);
    CHECK(rp.front() == 0);
    CHECK(rp.back() == 255);

    CHECK_THROWS_AS(encode_view(flat, ViewMode::png8, {1.0, 1.0}), UsageError);
    CHECK(view_mode_from_path("a.pgm") == ViewMode::pgm16);
    CHECK_THROWS_AS(view_mode_from_path("a.tif"), UsageError);
}
