#include "pgf/io.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "pgf/errors.hpp"

namespace pgf {

namespace {

using nlohmann::json;

std::string raw_sibling(const std::string& path) {
    std::filesystem::path p(path);
    p.replace_extension(".raw");
    return p.string();
}

void write_raw(const std::string& path, const cd* data, std::size_t count) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw NumericalFailure("io: cannot open " + path + " for writing");
    static_assert(sizeof(cd) == 2 * sizeof(double));
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(count * sizeof(cd)));
    if (!out) throw NumericalFailure("io: short write to " + path);
}

void read_raw(const std::string& path, cd* data, std::size_t count) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NumericalFailure("io: cannot open " + path);
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(count * sizeof(cd)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(cd)))
        throw NumericalFailure("io: short read from " + path);
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NumericalFailure("io: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ContractViolation("io: malformed header " + path + ": " + e.what());
    }
    return j;
}

} // namespace

void write_field(const std::string& path, const ComplexField& f) {
    const std::string raw = raw_sibling(path);
    json header{
        {"n", f.grid.n},
        {"m", f.grid.m},
        {"points_per_axis", f.grid.points_per_axis},
        {"half_width", f.grid.half_width},
        {"representation",
         f.rep == Representation::physical ? "physical" : "fourier"},
        {"dtype", "complex128-little-endian"},
        {"order", "row-major"},
        {"data", std::filesystem::path(raw).filename().string()},
    };
    std::ofstream out(path);
    if (!out) throw NumericalFailure("io: cannot open " + path + " for writing");
    out << header.dump(2) << "\n";
    write_raw(raw, f.data.data(), f.data.size());
}

ComplexField read_field(const std::string& path) {
    const json j = load_json(path);
    if (j.value("dtype", "") != "complex128-little-endian" ||
        j.value("order", "") != "row-major")
        throw ContractViolation("io: unsupported field encoding in " + path);
    GridSpec g(j.at("n").get<int>(), j.value("m", 1),
               j.at("points_per_axis").get<int>(),
               j.at("half_width").get<double>());
    ComplexField f(g, j.value("representation", "physical") == "fourier"
                          ? Representation::fourier
                          : Representation::physical);
    const std::string raw =
        (std::filesystem::path(path).parent_path() /
         j.at("data").get<std::string>())
            .string();
    read_raw(raw, f.data.data(), f.data.size());
    return f;
}

void write_dn_map(const std::string& path, const DNMap& dn) {
    const std::string raw = raw_sibling(path);
    json header{
        {"n", dn.n},
        {"m", dn.m},
        {"a", dn.a},
        {"Kt", dn.Kt},
        {"rows", dn.lambda.rows()},
        {"dtype", "complex128-little-endian"},
        {"order", "row-major"},
        {"data", std::filesystem::path(raw).filename().string()},
    };
    std::ofstream out(path);
    if (!out) throw NumericalFailure("io: cannot open " + path + " for writing");
    out << header.dump(2) << "\n";
    // Eigen stores column-major; serialize row-major for the declared order.
    const Eigen::Index R = dn.lambda.rows();
    std::vector<cd> buf(static_cast<std::size_t>(R) * R);
    for (Eigen::Index i = 0; i < R; ++i)
        for (Eigen::Index j = 0; j < R; ++j)
            buf[static_cast<std::size_t>(i) * R + j] = dn.lambda(i, j);
    write_raw(raw, buf.data(), buf.size());
}

DNMap read_dn_map(const std::string& path) {
    const json j = load_json(path);
    DNMap dn;
    dn.n = j.at("n").get<int>();
    dn.m = j.at("m").get<int>();
    dn.a = j.at("a").get<double>();
    dn.Kt = j.at("Kt").get<int>();
    const Eigen::Index R = j.at("rows").get<Eigen::Index>();
    std::vector<cd> buf(static_cast<std::size_t>(R) * R);
    const std::string raw =
        (std::filesystem::path(path).parent_path() /
         j.at("data").get<std::string>())
            .string();
    read_raw(raw, buf.data(), buf.size());
    dn.lambda.resize(R, R);
    for (Eigen::Index i = 0; i < R; ++i)
        for (Eigen::Index jj = 0; jj < R; ++jj)
            dn.lambda(i, jj) = buf[static_cast<std::size_t>(i) * R + jj];
    return dn;
}

} // namespace pgf
