#include <math.h>
#include <stdio.h>
#include <string.h>

#include "foresight.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,   \
                    #cond, fsr_last_error());                         \
            return 1;                                                 \
        }                                                             \
    } while (0)

static const char *SCENE =
    "{ \"scene\": { \"max_range_m\": 8.0, \"rng_seed\": 3,"
    "  \"walls\": [ { \"id\": \"back_wall\", \"range_m\": 6.0,"
    "    \"material\": { \"name\": \"lab_wall\", \"reflectivity\": 0.05, \"transmissivity\": 0.7 } } ],"
    "  \"scatterers\": [ { \"id\": \"human\", \"range_m\": 0.8, \"kind\": \"human\","
    "    \"material\": { \"name\": \"human\", \"reflectivity\": 0.08, \"transmissivity\": 0.3 } } ] } }";

int main(void) {
    FsrScene *scene = NULL;
    FsrProfile *scan = NULL, *ref = NULL, *cscan = NULL, *cref = NULL;
    FsrBaseline *baseline = NULL;
    FsrSafety *safety = NULL;
    FsrPeak peaks[8];
    int32_t classes[8];
    size_t count = 0;
    FsrBands bands;
    FsrPeak feature;
    FsrSafetyView view;
    char line[128];

    CHECK(strlen(fsr_version()) > 0);
    CHECK(fsr_scene_from_json(SCENE, &scene) == FSR_STATUS_OK);
    CHECK(fsr_scene_profile(scene, &scan) == FSR_STATUS_OK);
    CHECK(fsr_scene_reference_profile(scene, &ref) == FSR_STATUS_OK);
    CHECK(fsr_profile_len(scan) == fsr_profile_len(ref));
    CHECK(fsr_profile_range_compensated(scan, &cscan) == FSR_STATUS_OK);
    CHECK(fsr_profile_range_compensated(ref, &cref) == FSR_STATUS_OK);

    const FsrProfile *refs[1] = {cref};
    CHECK(fsr_baseline_capture(refs, 1, 6.0, &baseline) == FSR_STATUS_OK);
    CHECK(fsr_baseline_reference(baseline, &feature) == FSR_STATUS_OK);
    CHECK(fabs(feature.range_m - 6.0) < 0.075);

    CHECK(fsr_detect_peaks(cscan, 0.5 * feature.rsa, 0.5 * feature.rsa, peaks, 8, &count) == FSR_STATUS_OK);
    CHECK(count == 2);
    CHECK(fsr_default_bands(&bands) == FSR_STATUS_OK);
    for (size_t i = 0; i < count; i++) {
        double rrm = 0.0;
        CHECK(fsr_rrm(&peaks[i], baseline, &rrm) == FSR_STATUS_OK);
        CHECK(fsr_classify(rrm, &bands, &classes[i]) == FSR_STATUS_OK);
    }
    CHECK(classes[0] == FSR_CLASS_HUMAN);
    CHECK(classes[1] == FSR_CLASS_INFRASTRUCTURE);

    CHECK(fsr_safety_new(NULL, &safety) == FSR_STATUS_OK);
    CHECK(fsr_safety_update_tier(safety, peaks, classes, count) == FSR_STATUS_OK);
    CHECK(fsr_safety_get(safety, &view) == FSR_STATUS_OK);
    CHECK(view.tier == FSR_TIER_STOP);
    CHECK(view.speed_cap == 0.0);
    CHECK(fsr_safety_log_line(safety, 0, line, sizeof line) < sizeof line);
    CHECK(strncmp(line, "t=0 tier=stop", 13) == 0);

    CHECK(fsr_scene_from_json("{", &scene) == FSR_STATUS_INVALID_ARGUMENT);
    CHECK(strlen(fsr_last_error()) > 0);

    fsr_safety_free(safety);
    fsr_baseline_free(baseline);
    fsr_profile_free(cref);
    fsr_profile_free(cscan);
    fsr_profile_free(ref);
    fsr_profile_free(scan);
    fsr_scene_free(scene);
    printf("%s\n", line);
    return 0;
}
