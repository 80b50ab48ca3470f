#include "regcheck/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace regcheck {

namespace {

constexpr const char* kMagic = "MFLD1";

Rank parse_rank(const std::string& s) {
    if (s == rank_name(Rank::scalar)) return Rank::scalar;
    if (s == rank_name(Rank::vector)) return Rank::vector;
    if (s == rank_name(Rank::tensor)) return Rank::tensor;
    throw std::runtime_error("unknown rank '" + s + "'");
}

std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return __builtin_bswap64(v);
}

}  // namespace

void write_field(const std::filesystem::path& path, const SpectralField& f, const std::string& name) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    const nlohmann::json meta{
        {"n", f.grid().n()}, {"length", f.grid().length()}, {"rank", rank_name(f.rank())}, {"name", name}};
    os << kMagic << '\n' << meta.dump() << '\n';
    for (const Complex& z : f.coefficients())
        for (double part : {z.real(), z.imag()}) {
            const std::uint64_t bits = to_le(std::bit_cast<std::uint64_t>(part));
            os.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    if (!os) throw std::runtime_error("write failed for " + path.string());
}

SpectralField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::string magic, header;
    std::getline(is, magic);
    if (magic != kMagic) throw std::runtime_error(path.string() + ": not an MFLD1 file");
    std::getline(is, header);
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(header);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path.string() + ": bad header: " + e.what());
    }
    const Grid grid(meta.at("n").get<int>(), meta.at("length").get<double>());
    SpectralField f(grid, parse_rank(meta.at("rank").get<std::string>()));
    for (Complex& z : f.coefficients()) {
        double parts[2];
        for (double& part : parts) {
            std::uint64_t bits = 0;
            if (!is.read(reinterpret_cast<char*>(&bits), sizeof bits))
                throw std::runtime_error(path.string() + ": truncated coefficient data");
            part = std::bit_cast<double>(to_le(bits));
        }
        z = Complex(parts[0], parts[1]);
    }
    if (is.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path.string() + ": trailing data");
    return f;
}

void write_state(const std::filesystem::path& dir, const SystemState& state, const nlohmann::json& extra) {
    std::filesystem::create_directories(dir);
    const auto names = field_names(state.kind);
    nlohmann::json manifest{{"format", "MFLD1"}, {"kind", kind_name(state.kind)}};
    nlohmann::json files = nlohmann::json::array();
    for (std::size_t i = 0; i < state.fields.size(); ++i) {
        const std::string file = names[i] + ".mfld";
        write_field(dir / file, state.fields[i], names[i]);
        files.push_back(file);
    }
    manifest["fields"] = files;
    const auto optional_field = [&](const std::optional<SpectralField>& f, const char* key) {
        if (!f) return;
        const std::string file = std::string(key) + ".mfld";
        write_field(dir / file, *f, key);
        manifest[key] = file;
    };
    optional_field(state.forcing_f, "forcing_f");
    optional_field(state.forcing_g, "forcing_g");
    optional_field(state.frozen, "frozen");
    if (!extra.is_null()) manifest["extra"] = extra;
    std::ofstream os(dir / "state.json");
    if (!os) throw std::runtime_error("cannot write " + (dir / "state.json").string());
    os << manifest.dump(2) << '\n';
}

SystemState read_state(const std::filesystem::path& dir) {
    std::ifstream is(dir / "state.json");
    if (!is) throw std::runtime_error("cannot read " + (dir / "state.json").string());
    const auto manifest = nlohmann::json::parse(is);
    SystemState s;
    s.kind = parse_kind(manifest.at("kind").get<std::string>());
    for (const auto& file : manifest.at("fields")) s.fields.push_back(read_field(dir / file.get<std::string>()));
    if (s.fields.size() != field_names(s.kind).size())
        throw std::runtime_error(dir.string() + ": wrong number of fields for " + kind_name(s.kind));
    for (const char* key : {"forcing_f", "forcing_g", "frozen"}) {
        if (!manifest.contains(key)) continue;
        auto f = read_field(dir / manifest[key].get<std::string>());
        if (std::strcmp(key, "forcing_f") == 0) s.forcing_f = std::move(f);
        else if (std::strcmp(key, "forcing_g") == 0) s.forcing_g = std::move(f);
        else s.frozen = std::move(f);
    }
    return s;
}

}  // namespace regcheck
