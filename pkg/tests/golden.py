"""Golden per-topology summary: STTs, primary directions, false facets,
fractional D-vertices, their orbit classes, D and XZD denominator sets."""

SUMMARY = {
    'U_3_0': (5, 9, 0, 0, 0, (1,), (1,)),
    'U_4_0': (14, 32, 0, 0, 0, (1,), (1,)),
    'U_4_1': (16, 32, 0, 0, 0, (1,), (1,)),
    'U_5_0': (42, 145, 0, 0, 0, (1,), (1, 2, 3)),
    'U_5_1': (51, 152, 0, 0, 0, (1,), (1,)),
    'U_5_2': (65, 161, 0, 0, 0, (1,), (1,)),
    'U_6_0': (132, 776, 0, 0, 0, (1,), (1, 2)),
    'U_6_1': (166, 910, 0, 0, 0, (1,), (1, 2)),
    'U_6_2': (176, 908, 0, 0, 0, (1,), (1, 2)),
    'U_6_3': (214, 949, 0, 0, 0, (1,), (1,)),
    'U_6_4': (236, 978, 0, 0, 0, (1,), (1,)),
    'U_6_5': (326, 1071, 0, 0, 0, (1,), (1,)),
    'U_7_0': (429, 4839, 0, 0, 0, (1,), (1, 2, 3, 4)),
    'U_7_1': (552, 5932, 0, 0, 0, (1,), (1, 2, 3)),
    'U_7_2': (605, 6224, 0, 0, 0, (1,), (1, 2, 3)),
    'U_7_3': (662, 6364, 39, 9, 2, (1, 2), (1, 2)),
    'U_7_4': (836, 6817, 0, 0, 0, (1,), (1, 2)),
    'U_7_5': (807, 7002, 0, 0, 0, (1,), (1, 2)),
    'U_7_6': (930, 6933, 0, 0, 0, (1,), (1, 2)),
    'U_7_7': (721, 7077, 0, 0, 0, (1,), (1, 2)),
    'U_7_8': (1135, 7534, 0, 0, 0, (1,), (1,)),
    'U_7_9': (1337, 7579, 0, 0, 0, (1,), (1,)),
    'U_7_10': (1957, 8733, 0, 0, 0, (1,), (1,)),
    'U_8_0': (1430, 35097, 0, 0, 0, (1,), (1, 2, 3, 4, 5)),
    'U_8_1': (1870, 44103, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_2': (2094, 46368, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_3': (2164, 47535, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_4': (2416, 48291, 362, 65, 38, (1, 2), (1, 2, 3)),
    'U_8_5': (2952, 56376, 120, 2, 1, (1, 2), (1, 2, 3)),
    'U_8_6': (2802, 56724, 10, 2, 1, (1, 2), (1, 2, 3, 4)),
    'U_8_7': (3232, 57252, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_8': (2952, 51172, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_9': (3490, 53029, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_10': (2470, 53923, 0, 0, 0, (1,), (1, 2, 3, 4)),
    'U_8_11': (3988, 54201, 78, 18, 4, (1, 2), (1, 2)),
    'U_8_12': (3332, 56404, 528, 60, 24, (1, 2), (1, 2, 3)),
    'U_8_13': (4076, 65733, 946, 28, 4, (1, 2), (1, 2)),
    'U_8_14': (4674, 64110, 0, 0, 0, (1,), (1, 2)),
    'U_8_15': (4884, 62553, 0, 0, 0, (1,), (1, 2)),
    'U_8_16': (3996, 63179, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_17': (5940, 59967, 0, 0, 0, (1,), (1,)),
    'U_8_18': (5142, 58200, 0, 0, 0, (1,), (1, 2, 3)),
    'U_8_19': (6842, 71285, 0, 0, 0, (1,), (1,)),
    'U_8_20': (7284, 68654, 0, 0, 0, (1,), (1,)),
    'U_8_21': (8970, 68714, 0, 0, 0, (1,), (1,)),
    'U_8_22': (13700, 83434, 0, 0, 0, (1,), (1,)),
}
