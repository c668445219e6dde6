#include "dsc/error.hpp"

namespace dsc {

std::string_view to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Incomplete: return "Incomplete";
    case ErrorKind::Overfull: return "Overfull";
    case ErrorKind::UnknownToken: return "UnknownToken";
    case ErrorKind::FeatureIndexOutOfRange: return "FeatureIndexOutOfRange";
    case ErrorKind::DeadEnd: return "DeadEnd";
    case ErrorKind::ZeroProbability: return "ZeroProbability";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::DataInvalid: return "DataInvalid";
    case ErrorKind::EmptyArchive: return "EmptyArchive";
    case ErrorKind::EmptyFront: return "EmptyFront";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::NotReducible: return "NotReducible";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

} // namespace dsc
