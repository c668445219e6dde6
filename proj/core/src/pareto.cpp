#include "dsc/pareto.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "dsc/error.hpp"

namespace dsc {

std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& archive)
{
    if (archive.empty()) {
        throw Error(ErrorKind::EmptyArchive, "no candidates to build a front from");
    }
    std::vector<ParetoPoint> sorted = archive;
    std::sort(sorted.begin(), sorted.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
        if (a.complexity != b.complexity) return a.complexity < b.complexity;
        if (a.f1 != b.f1) return a.f1 > b.f1;
        return a.expression < b.expression;
    });
    std::vector<ParetoPoint> front;
    for (const auto& p : sorted) {
        // sorted by complexity, so p is dominated iff it does not beat the
        // best f1 seen at lower-or-equal complexity
        if (front.empty() || p.f1 > front.back().f1) {
            front.push_back(p);
        }
    }
    return front;
}

ParetoPoint elbow(const std::vector<ParetoPoint>& front, double min_gain)
{
    if (front.empty()) {
        throw Error(ErrorKind::EmptyFront, "elbow of an empty front");
    }
    std::size_t chosen = 0;
    for (std::size_t i = 1; i < front.size(); ++i) {
        const double dc = static_cast<double>(front[i].complexity - front[i - 1].complexity);
        const double gain = dc > 0 ? (front[i].f1 - front[i - 1].f1) / dc : 0.0;
        if (gain >= min_gain) {
            chosen = i;
        }
    }
    return front[chosen];
}

void write_archive(const std::vector<ParetoPoint>& points, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path));
    }
    out << "complexity\tf1\texpression\n";
    for (const auto& p : points) {
        out << fmt::format("{}\t{}\t{}\n", p.complexity, p.f1, p.expression);
    }
}

std::vector<ParetoPoint> read_archive(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    }
    std::string line;
    if (!std::getline(in, line) || !line.starts_with("complexity\tf1\texpression")) {
        throw Error(ErrorKind::SchemaMismatch, fmt::format("'{}' lacks the archive header", path));
    }
    std::vector<ParetoPoint> points;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) {
            continue;
        }
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: expected three tab-separated fields", path, row));
        }
        ParetoPoint p;
        const char* b = line.data();
        auto r1 = std::from_chars(b, b + t1, p.complexity);
        auto r2 = std::from_chars(b + t1 + 1, b + t2, p.f1);
        if (r1.ec != std::errc{} || r2.ec != std::errc{}) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: bad number", path, row));
        }
        p.expression = line.substr(t2 + 1);
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace dsc
