#include "chernlab/snapshot.hpp"

#include <json.hpp>

#include <cstring>
#include <fstream>

namespace chernlab {

using nlohmann::json;

namespace {

static_assert(sizeof(double) == 8);

void put_f64(std::vector<uint8_t>& out, double x) {
    uint64_t u;
    std::memcpy(&u, &x, 8);
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(u >> (8 * b)));
}

double get_f64(const uint8_t* p) {
    uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<uint64_t>(p[b]) << (8 * b);
    double x;
    std::memcpy(&x, &u, 8);
    return x;
}

json domain_spec(const Domain& d) {
    const DomainChart& c = d.chart(0);
    json j;
    switch (c.kind) {
        case ChartKind::Torus: j["kind"] = "torus"; break;
        case ChartKind::Disk: j["kind"] = "disk"; break;
        case ChartKind::Sphere: j["kind"] = "sphere"; break;
    }
    j["n"] = c.n;
    j["size"] = c.size;
    switch (c.lam) {
        case LambdaKind::Flat: j["lambda"] = "flat"; break;
        case LambdaKind::Sphere: j["lambda"] = "sphere"; break;
        case LambdaKind::Hyperbolic: j["lambda"] = "hyperbolic"; break;
    }
    j["scheme"] = c.scheme == DiffScheme::Spectral ? "spectral" : "stencil4";
    return j;
}

Domain domain_from_spec(const json& j) {
    const std::string kind = j.at("kind");
    const int n = j.at("n");
    const double size = j.at("size");
    const std::string scheme_s = j.value("scheme", "spectral");
    const DiffScheme scheme =
        scheme_s == "spectral" ? DiffScheme::Spectral : DiffScheme::Stencil4;
    if (kind == "torus") return Domain::torus(n, size, scheme);
    if (kind == "sphere") return Domain::sphere_pair(n);
    const std::string lam = j.value("lambda", "flat");
    LambdaKind lk = LambdaKind::Flat;
    if (lam == "sphere") lk = LambdaKind::Sphere;
    if (lam == "hyperbolic") lk = LambdaKind::Hyperbolic;
    return Domain::disk(n, size, lk);
}

}  // namespace

std::vector<uint8_t> snapshot_bytes(const MapState& m) {
    bool uniform = true;
    int16_t uni = m.charts[0].tchart.v[0];
    for (const auto& ch : m.charts)
        for (const auto& t : ch.tchart.v)
            if (t != uni) uniform = false;

    json hdr;
    hdr["format_version"] = 1;
    hdr["domain"] = domain_spec(*m.domain);
    hdr["target"] = to_string(m.target->id());
    hdr["chart_ids"] = uniform ? ("uniform:" + std::to_string(uni)) : std::string("i16");
    hdr["grids"] = m.domain->num_charts();

    std::vector<uint8_t> out;
    const std::string h = hdr.dump();
    out.insert(out.end(), h.begin(), h.end());
    out.push_back('\n');
    for (const auto& ch : m.charts) {
        if (!uniform)
            for (const auto& t : ch.tchart.v) {
                out.push_back(static_cast<uint8_t>(t & 0xff));
                out.push_back(static_cast<uint8_t>((t >> 8) & 0xff));
            }
        for (size_t t = 0; t < ch.z1.v.size(); ++t) {
            put_f64(out, ch.z1.v[t].real());
            put_f64(out, ch.z1.v[t].imag());
            put_f64(out, ch.z2.v[t].real());
            put_f64(out, ch.z2.v[t].imag());
        }
    }
    return out;
}

void save_snapshot(const MapState& m, const std::string& path) {
    const std::vector<uint8_t> bytes = snapshot_bytes(m);
    std::ofstream f(path, std::ios::binary);
    if (!f) fail("IOError", "cannot write " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

MapState load_snapshot(const std::string& path, std::shared_ptr<const HermitianTarget> tgt) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("IOError", "cannot read " + path);
    std::string hline;
    std::getline(f, hline);
    json hdr = json::parse(hline);
    if (hdr.at("format_version").get<int>() != 1)
        fail("Format", "unsupported snapshot version");

    MapState m;
    m.domain = std::make_shared<Domain>(domain_from_spec(hdr.at("domain")));
    if (!tgt) tgt = std::make_shared<HermitianTarget>(target_from_string(hdr.at("target")));
    if (to_string(tgt->id()) != hdr.at("target").get<std::string>())
        fail("Format", "snapshot target mismatch");
    m.target = tgt;

    const std::string enc = hdr.at("chart_ids");
    const bool uniform = enc.rfind("uniform:", 0) == 0;
    const int16_t uni = uniform ? static_cast<int16_t>(std::stoi(enc.substr(8))) : 0;
    const int grids = hdr.at("grids");
    const int n = m.domain->n();
    if (grids != m.domain->num_charts()) fail("Format", "grid count mismatch");

    std::vector<uint8_t> rest((std::istreambuf_iterator<char>(f)),
                              std::istreambuf_iterator<char>());
    size_t pos = 0;
    auto need = [&](size_t k) {
        if (pos + k > rest.size()) fail("Format", "snapshot truncated");
    };
    for (int g = 0; g < grids; ++g) {
        MapState::ChartData d;
        d.z1 = GridC(n);
        d.z2 = GridC(n);
        d.tchart = Grid2D<int16_t>(n, uni);
        d.valid = Grid2D<uint8_t>(n, 1);
        if (!uniform) {
            need(2 * static_cast<size_t>(n) * n);
            for (size_t t = 0; t < d.tchart.v.size(); ++t) {
                d.tchart.v[t] = static_cast<int16_t>(rest[pos] | (rest[pos + 1] << 8));
                pos += 2;
            }
        }
        need(32 * static_cast<size_t>(n) * n);
        for (size_t t = 0; t < d.z1.v.size(); ++t) {
            const double a = get_f64(&rest[pos]);
            const double b = get_f64(&rest[pos + 8]);
            const double cc = get_f64(&rest[pos + 16]);
            const double dd = get_f64(&rest[pos + 24]);
            pos += 32;
            d.z1.v[t] = cd(a, b);
            d.z2.v[t] = cd(cc, dd);
        }
        m.charts.push_back(std::move(d));
    }
    if (pos != rest.size()) fail("Format", "trailing bytes in snapshot");
    return m;
}

std::string snapshot_info(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) fail("IOError", "cannot read " + path);
    std::string hline;
    std::getline(f, hline);
    json hdr = json::parse(hline);
    return hdr.dump(2);
}

}  // namespace chernlab
