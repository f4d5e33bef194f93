#include <stdio.h>
#include <string.h>

#include "cluster_purging.h"

#define CHECK(expr)                                                        \
    do {                                                                   \
        if ((expr) != CP_STATUS_OK) {                                      \
            fprintf(stderr, "%s failed: %s\n", #expr, cp_last_error_message()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(void) {
    const double xs[] = {0.0, 0.1, 0.2, 0.3, 0.4, 100.0};
    const size_t p_labels[] = {0, 0, 0, 0, 0, 1};
    const size_t q_labels[] = {0, 0, 1, 1, 1, 2};
    CpDataset *ds = NULL;
    CpClustering *p = NULL, *q = NULL;
    CpReport *report = NULL;
    char *json = NULL;

    CHECK(cp_dataset_new(xs, 6, 1, &ds));
    CHECK(cp_clustering_with_means(ds, p_labels, 6, &p));
    CHECK(cp_clustering_with_means(ds, q_labels, 6, &q));
    const CpClustering *cs[] = {p, q};
    CHECK(cp_detect_parameter_free(ds, cs, 2, CP_MEASURE_EUCLIDEAN, &report));

    size_t out[6];
    size_t count = cp_report_num_outliers(report);
    CHECK(cp_report_outliers(report, out, 6));
    if (count != 1 || out[0] != 5) {
        fprintf(stderr, "unexpected outliers\n");
        return 1;
    }
    CHECK(cp_report_to_json(report, &json));
    if (strstr(json, "\"outliers\"") == NULL) {
        fprintf(stderr, "json lacks outliers\n");
        return 1;
    }
    if (cp_hac_complete(ds, 0, &q) != CP_STATUS_INVALID_ARGUMENT || cp_last_error_message() == NULL) {
        fprintf(stderr, "k = 0 accepted\n");
        return 1;
    }
    printf("outliers: %zu\n", out[0]);

    cp_string_free(json);
    cp_report_free(report);
    cp_clustering_free(p);
    cp_clustering_free(q);
    cp_dataset_free(ds);
    return 0;
}
