#include <stdio.h>
#include <string.h>
#include "quizlab.h"

int main(void) {
    QuizlabFamily *fam = NULL;
    if (quizlab_family_new("{\"variant\":\"univariate-d\",\"d\":2,\"task\":\"identity\"}", &fam) != QUIZLAB_STATUS_OK) {
        return 10;
    }
    int64_t num[1] = {2}, den[1] = {1};
    char *json = NULL;
    if (quizlab_game_exact(fam, num, den, 1, 0, 1, &json) != QUIZLAB_STATUS_OK) {
        return 11;
    }
    int accepted = strstr(json, "\"verdict\": \"accept\"") != NULL;
    quizlab_string_free(json);
    quizlab_family_free(fam);

    uint32_t mask = 0;
    int64_t un[3] = {2, -3, 5}, ud[3] = {1, 1, 7};
    if (quizlab_kron_verify(3, 1, 2, un, ud, &mask) != QUIZLAB_STATUS_OK) {
        return 12;
    }
    if (quizlab_family_new("{\"variant\":\"univariate-d\",\"d\":0,\"task\":\"identity\"}", &fam) != QUIZLAB_STATUS_INVALID_ARGUMENT
        || quizlab_last_error() == NULL) {
        return 13;
    }
    printf("%s accept=%d mask=%u\n", quizlab_version(), accepted, mask);
    return accepted && mask == 7 ? 0 : 1;
}
