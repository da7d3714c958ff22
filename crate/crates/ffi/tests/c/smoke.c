#include <stdio.h>
#include <string.h>
#include "masp.h"

static const char *PROGRAM = "p(a) :- not q(a). q(a) :- not p(a).";

int main(void) {
    MaspProgram *p = NULL;
    if (masp_program_parse(PROGRAM, &p) != MASP_STATUS_OK) return 1;
    MaspAnswerSets *r = NULL;
    if (masp_solve(p, &r) != MASP_STATUS_OK) return 2;
    if (masp_answer_sets_count(r) != 2) return 3;
    char *s = NULL;
    if (masp_answer_sets_json(r, &s) != MASP_STATUS_OK) return 4;
    printf("%s\n", s);
    masp_string_free(s);
    if (masp_answer_sets_get(r, 9, &s) != MASP_STATUS_INDEX) return 5;
    char *msg = masp_last_error();
    if (msg == NULL || strstr(msg, "out of range") == NULL) return 6;
    masp_string_free(msg);
    masp_answer_sets_free(r);
    masp_program_free(p);
    return 0;
}
