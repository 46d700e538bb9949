"""Bundled ISO 3166-1 alpha-2 country -> continental region table.

Covers all 249 officially assigned codes. Transcontinental countries sit in
their UN M49 statistical region (Russia and Turkey in Europe and Asia
respectively, Egypt in Africa, and so on); the Americas are split into their
northern (incl. Central America and the Caribbean) and southern continents.
"""

from __future__ import annotations

_REGION_MEMBERS: dict[str, str] = {
    "north_america": (
        "AG AI AW BB BL BM BQ BS BZ CA CR CU CW DM DO GD GL GP GT HN HT JM "
        "KN KY LC MF MQ MS MX NI PA PM PR SV SX TC TT US VC VG VI"
    ),
    "south_america": "AR BO BR BV CL CO EC FK GF GS GY PE PY SR UY VE",
    "europe": (
        "AD AL AT AX BA BE BG BY CH CZ DE DK EE ES FI FO FR GB GG GI GR HR "
        "HU IE IM IS IT JE LI LT LU LV MC MD ME MK MT NL NO PL PT RO RS RU "
        "SE SI SJ SK SM UA VA"
    ),
    "africa": (
        "AO BF BI BJ BW CD CF CG CI CM CV DJ DZ EG EH ER ET GA GH GM GN GQ "
        "GW IO KE KM LR LS LY MA MG ML MR MU MW MZ NA NE NG RE RW SC SD SH "
        "SL SN SO SS ST SZ TD TF TG TN TZ UG YT ZA ZM ZW"
    ),
    "asia": (
        "AE AF AM AZ BD BH BN BT CN CY GE HK ID IL IN IQ IR JO JP KG KH KP "
        "KR KW KZ LA LB LK MM MN MO MV MY NP OM PH PK PS QA SA SG SY TH TJ "
        "TL TM TR TW UZ VN YE"
    ),
    "oceania": (
        "AS AU CC CK CX FJ FM GU HM KI MH MP NC NF NR NU NZ PF PG PN PW SB "
        "TK TO TV UM VU WF WS"
    ),
    "antarctica": "AQ",
}


def _build_table() -> dict[str, str]:
    table: dict[str, str] = {}
    for region, members in _REGION_MEMBERS.items():
        for code in members.split():
            if code in table:
                raise AssertionError(f"country {code} assigned twice")
            table[code] = region
    return table


# code -> canonical region spelling; exactly the 249 officially assigned codes
COUNTRY_REGION: dict[str, str] = _build_table()
