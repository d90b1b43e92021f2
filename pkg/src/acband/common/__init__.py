# Shared vocabulary: records, errors, seeded streams, configuration, logging
