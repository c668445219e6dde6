#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "dsc/error.hpp"
#include "dsc/policy.hpp"

namespace dsc {

namespace {

constexpr char magic[4] = {'D', 'S', 'C', 'P'};
constexpr std::uint32_t format_version = 1;

void put_u32(std::ostream& out, std::uint32_t v)
{
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
    }
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void put_f64(std::ostream& out, double v)
{
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) {
        bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
    }
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint32_t get_u32(std::istream& in)
{
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw Error(ErrorKind::Io, "truncated checkpoint");
    }
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    }
    return v;
}

double get_f64(std::istream& in)
{
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) {
        throw Error(ErrorKind::Io, "truncated checkpoint");
    }
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

struct Tensor {
    std::uint32_t rows = 0;
    std::uint32_t cols = 0;
    std::vector<double> values;
};

} // namespace

void save_checkpoint(const PolicyNet& net, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}' for writing", path));
    }
    out.write(magic, 4);
    put_u32(out, format_version);
    std::uint32_t count = 0;
    net.params().for_each([&](const char*, const double*, Eigen::Index, Eigen::Index) { ++count; });
    put_u32(out, count);
    net.params().for_each([&](const char* name, const double* data, Eigen::Index rows, Eigen::Index cols) {
        const auto len = static_cast<std::uint32_t>(std::strlen(name));
        put_u32(out, len);
        out.write(name, len);
        put_u32(out, static_cast<std::uint32_t>(rows));
        put_u32(out, static_cast<std::uint32_t>(cols));
        for (Eigen::Index i = 0; i < rows * cols; ++i) {
            put_f64(out, data[i]);
        }
    });
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("write failed for '{}'", path));
    }
}

void load_checkpoint(PolicyNet& net, const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    }
    char header[4];
    if (!in.read(header, 4) || std::memcmp(header, magic, 4) != 0) {
        throw Error(ErrorKind::Io, fmt::format("'{}' is not a policy checkpoint", path));
    }
    if (const auto version = get_u32(in); version != format_version) {
        throw Error(ErrorKind::Io, fmt::format("unsupported checkpoint version {}", version));
    }
    const auto count = get_u32(in);
    std::map<std::string, Tensor> tensors;
    for (std::uint32_t k = 0; k < count; ++k) {
        const auto len = get_u32(in);
        std::string name(len, '\0');
        if (!in.read(name.data(), len)) {
            throw Error(ErrorKind::Io, "truncated checkpoint");
        }
        Tensor t;
        t.rows = get_u32(in);
        t.cols = get_u32(in);
        t.values.resize(static_cast<std::size_t>(t.rows) * t.cols);
        for (auto& v : t.values) {
            v = get_f64(in);
        }
        tensors.emplace(std::move(name), std::move(t));
    }
    net.params().for_each([&](const char* name, double* data, Eigen::Index rows, Eigen::Index cols) {
        auto it = tensors.find(name);
        if (it == tensors.end()) {
            throw Error(ErrorKind::Io, fmt::format("checkpoint lacks tensor '{}'", name));
        }
        if (it->second.rows != rows || it->second.cols != cols) {
            throw Error(ErrorKind::Io, fmt::format("tensor '{}' is {}x{}, expected {}x{}", name, it->second.rows,
                                                   it->second.cols, rows, cols));
        }
        std::copy(it->second.values.begin(), it->second.values.end(), data);
    });
}

} // namespace dsc
