#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace posterlab {

// A fixed-dimension real vector tagged with its channel and sample id.
struct FeatureVector {
    std::string id;
    std::vector<float> values;
};

// Contents of one PFV (Poster Feature Vector) file: every record shares the
// channel name and dimension.
struct FeatureFile {
    std::string channel;
    std::uint32_t dim = 0;
    std::vector<FeatureVector> records;
};

// PFV binary layout, little-endian:
//   magic "PFV1"
//   u16 channel-name length, UTF-8 channel name
//   u32 record count, u32 dim
//   per record: u16 id length, UTF-8 id, dim x f32
// Round-trips are bit-exact.
FeatureFile read_pfv(const std::string& path);
void write_pfv(const std::string& path, const FeatureFile& file);

} // namespace posterlab
