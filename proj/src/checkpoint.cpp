#include "bvq/checkpoint.hpp"

#include "bvq/binio.hpp"

namespace bvq {

void save_checkpoint(const std::string& path, const std::map<std::string, Tensor>& tensors) {
    std::ofstream os(path, std::ios::binary);
    if (!os) data_error("cannot open '" + path + "' for writing");
    io::write_magic(os, "BVQP");
    io::write_u32(os, kCheckpointVersion);
    io::write_u32(os, static_cast<uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        if (!t.all_finite()) numeric_error("refusing to checkpoint non-finite tensor '" + name + "'");
        io::write_u32(os, static_cast<uint32_t>(name.size()));
        io::write_bytes(os, name.data(), name.size());
        io::write_u32(os, static_cast<uint32_t>(t.shape.size()));
        for (uint32_t e : t.shape) io::write_u32(os, e);
        io::write_f32_array(os, t.data.data(), t.numel());
    }
    os.flush();
    if (!os) data_error("write failed for '" + path + "'");
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) data_error("cannot open checkpoint '" + path + "'");
    io::check_magic(is, "BVQP", "checkpoint");
    const uint32_t version = io::read_u32(is, "checkpoint version");
    if (version != kCheckpointVersion)
        data_error("unsupported checkpoint version " + std::to_string(version));
    const uint32_t count = io::read_u32(is, "checkpoint tensor count");
    std::map<std::string, Tensor> out;
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t name_len = io::read_u32(is, "tensor name length");
        if (name_len > 4096) data_error("implausible tensor name length");
        std::string name(name_len, '\0');
        io::read_bytes(is, name.data(), name_len, "tensor name");
        const uint32_t rank = io::read_u32(is, "tensor rank");
        if (rank > 8) data_error("implausible tensor rank " + std::to_string(rank));
        Shape shape(rank);
        for (uint32_t r = 0; r < rank; ++r) shape[r] = io::read_u32(is, "tensor extent");
        Tensor t(shape);
        io::read_f32_array(is, t.data.data(), t.numel(), ("tensor '" + name + "' payload").c_str());
        out.emplace(std::move(name), std::move(t));
    }
    return out;
}

}  // namespace bvq
