#!/usr/bin/env python3
"""Generates the tableau fixture files under fixtures/.

Classical tableaux (RK4, Nystrom-5, Cooper-Verner-8) are expanded from exact
rationals (and sqrt(21)) to 100 significant digits.  The order-6/order-8
tables keep their published 33-40 digit decimal strings verbatim, with exact
rational entries expanded to 80 digits.
"""

import json
import os
from fractions import Fraction

import mpmath as mp

mp.mp.dps = 120
DIGITS = 100
OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "fixtures")


def dec(x, digits=DIGITS):
    if isinstance(x, Fraction):
        x = mp.mpf(x.numerator) / mp.mpf(x.denominator)
    return mp.nstr(x, digits, strip_zeros=False)


def tableau_json(order, c, b, A, precision_bits=256):
    s = len(c)
    assert len(b) == s and len(A) == s
    doc = {
        "format_version": 1,
        "order": order,
        "stages": s,
        "precision_bits": precision_bits,
        "c": [entry_str(x) for x in c],
        "b": [entry_str(x) for x in b],
        "b_embedded": None,
        "A": [[entry_str(A[i][j]) if j < len(A[i]) else "0" for j in range(s)]
              for i in range(s)],
    }
    return doc


def entry_str(x):
    if isinstance(x, str):
        return x
    if isinstance(x, int):
        x = Fraction(x)
    return dec(x)


def write(name, doc):
    path = os.path.join(OUT, name)
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print("wrote", path)


F = Fraction

# Classical RK4.
rk4 = tableau_json(
    4,
    c=[0, F(1, 2), F(1, 2), 1],
    b=[F(1, 6), F(1, 3), F(1, 3), F(1, 6)],
    A=[[], [F(1, 2)], [0, F(1, 2)], [0, 0, 1]],
)
write("rk4.json", rk4)

# Nystrom's fifth-order method.
nystrom = tableau_json(
    5,
    c=[0, F(1, 3), F(2, 5), 1, F(2, 3), F(4, 5)],
    b=[F(23, 192), 0, F(125, 192), 0, F(-27, 64), F(125, 192)],
    A=[
        [],
        [F(1, 3)],
        [F(4, 25), F(6, 25)],
        [F(1, 4), -3, F(15, 4)],
        [F(2, 27), F(10, 9), F(-50, 81), F(8, 81)],
        [F(2, 25), F(12, 25), F(2, 15), F(8, 75), 0],
    ],
)
write("nystrom5.json", nystrom)

# Cooper and Verner's 11-stage eighth-order method.
r21 = mp.sqrt(21)


def cv(a, bcoef, den):
    """(a + bcoef*sqrt(21)) / den."""
    return (mp.mpf(a) + mp.mpf(bcoef) * r21) / mp.mpf(den)


cv_c = [0, F(1, 2), F(1, 2), cv(7, 1, 14), cv(7, 1, 14), F(1, 2),
        cv(7, -1, 14), cv(7, -1, 14), F(1, 2), cv(7, 1, 14), 1]
cv_b = [F(1, 20), 0, 0, 0, 0, 0, 0, F(49, 180), F(16, 45), F(49, 180), F(1, 20)]
cv_A = [
    [],
    [F(1, 2)],
    [F(1, 4), F(1, 4)],
    [F(1, 7), cv(-7, -3, 98), cv(21, 5, 49)],
    [cv(11, 1, 84), 0, cv(18, 4, 63), cv(21, -1, 252)],
    [cv(5, 1, 48), 0, cv(9, 1, 36), cv(-231, 14, 360), cv(63, -7, 80)],
    [cv(10, -1, 42), 0, cv(-432, 92, 315), cv(633, -145, 90), cv(-504, 115, 70),
     cv(63, -13, 35)],
    [F(1, 14), 0, 0, 0, cv(14, -3, 126), cv(13, -3, 63), F(1, 9)],
    [F(1, 32), 0, 0, 0, cv(91, -21, 576), F(11, 72), cv(-385, -75, 1152),
     cv(63, 13, 128)],
    [F(1, 14), 0, 0, 0, F(1, 9), cv(-733, -147, 2205), cv(515, 111, 504),
     cv(-51, -11, 56), cv(132, 28, 245)],
    [0, 0, 0, 0, cv(-42, 7, 18), cv(-18, 28, 45), cv(-273, -53, 72),
     cv(301, 53, 72), cv(28, -28, 45), cv(49, -7, 18)],
]
write("cooper_verner8.json", tableau_json(8, cv_c, cv_b, cv_A))

# Published sixth-order table.
X2 = "0.2763932022500210303590826331268723764559"
X3 = "0.7236067977499789696409173668731276235441"
o6_c = [0, X2, X3, X2, X3, X2, X3, 1]
o6_b = [F(1, 12), 0, F(5, 36), F(5, 24), F(5, 36), F(5, 24), F(5, 36), F(1, 12)]
o6_A = [
    [],
    ["0.2763932022500210303590826331268723764559"],
    ["-0.2236067977499789696409173668731276235441",
     "0.9472135954999579392818347337462552470881"],
    ["0.1381966011250105151795413165634361882280",
     "0.1381966011250105151795413165634361882280", 0],
    ["0.5854101966249684544613760503096914353161",
     "-1.8944271909999158785636694674925104941762", F(1, 2),
     "1.5326237921249263937432107840559466824042"],
    ["0.1030056647916491413674311390609396862867",
     "-0.1381966011250105151795413165634361882280",
     "-0.0217491947499509291621405227039644549361", F(1, 3), 0],
    ["-0.2236067977499789696409173668731276235441",
     "0.9472135954999579392818347337462552470881",
     "-0.1381966011250105151795413165634361882280",
     "-1.4208203932499369089227521006193828706322",
     "0.1381966011250105151795413165634361882280",
     "1.4208203932499369089227521006193828706322"],
    [F(1, 6), 0,
     "-0.0879773408334034345302754437562412548531",
     "0.7893446629166316160681956114552127059068",
     "0.2303276685416841919659021942723936470466",
     "-0.5590169943749474241022934171828190588602",
     "0.4606553370833683839318043885447872940932"],
]
write("order6.json", tableau_json(6, o6_c, o6_b, o6_A))

# Published eighth-order baseline table.
Y2 = "0.1726731646460114281008537718765708222154"
Y4 = "0.8273268353539885718991462281234291777846"
o8_c = [0, Y2, Y2, F(1, 2), Y4, F(1, 2), Y2, Y4, F(1, 2), Y2, Y4, F(1, 2), Y4, 1]
o8_b = [F(1, 20), 0, 0, 0, F(49, 720), F(16, 135), F(49, 360), F(49, 720),
        F(16, 135), F(49, 360), F(49, 720), F(16, 135), F(49, 720), F(1, 20)]
A21 = Y2
A31 = "0.0863365823230057140504268859382854111077"
A51 = "0.3472041832132342858711439808030478211663"
A53 = "-0.3121452601573282541773983236104129679043"
A54 = "0.7922679122980825402054005709307943245226"
A61 = "0.0086963396884199998627490167973331564795"
A63 = "0.3685974296159088892091411830284448571034"
A64 = "0.1227062306956711109281098001742219864171"
A73 = "0.1015181575196660317721747904513016209880"
o8_A = [
    [],
    [A21],
    [A31, A31],
    ["-0.2239109809347400004117529496080005305615",
     "0.7239109809347400004117529496080005305615", 0],
    [A51, 0, A53, A54],
    [A61, 0, A63, A64, 0],
    ["0.0763979083933828570644280095984760894169", 0, A73,
     "-0.0052429012670374607357490281732068881895", 0, 0],
    ["-0.7558982639254171433277176566948577492132", 0,
     "0.9364357804719847625321949708312389037128",
     "-2.3768037368942476206162017127923829735677", F(4, 9),
     "1.6982683863407949218897867670593032042510",
     "0.8808802249164292069766394152756833481572"],
    ["0.0763573206231600002745019664053336870410", 0,
     "-0.7371948592318177784182823660568897142068",
     "-0.2454124613913422218562196003484439728342",
     "-0.0272608833024616673872343284806675951493", F(11, 24),
     "0.9751775499691283340539009951473342618160", 0],
    ["0.0664592344637600000784291332586667677260", 0,
     "-0.1015181575196660317721747904513016209880",
     "0.0052429012670374607357490281732068881895",
     "0.0040043319862298409561247368066027703658",
     "-0.0237373677735720641194965581328262053001", F(2, 9), 0, 0],
    [A51, 0, A53, A54, "-0.1015181575196660317721747904513016209880",
     "-0.6419111699433515349492526724849107715542",
     "0.6242905203146565083547966472208259358085",
     "0.1015181575196660317721747904513016209880",
     "0.6419111699433515349492526724849107715542",
     "-0.6242905203146565083547966472208259358085"],
    [A61, 0, A63, A64, "0.0030105722119316669068558872713336428276",
     "-0.1227062306956711109281098001742219864171",
     "-0.9098701805298291672671397181783341070689",
     "-0.0030105722119316669068558872713336428276",
     A64, "0.9098701805298291672671397181783341070689", 0],
    [A51, 0, A53, A54, "-0.0863365823230057140504268859382854111077",
     "-1.2606885110156016333701275857118920804337", 0, 0, 0, 0, A31,
     "1.2606885110156016333701275857118920804337"],
    [0, 0, 0, 0, "-0.0676381975765999989324923528681467726183",
     "0.7323606311023881494494908036993597015278",
     "-0.5562780543026933337603363921860746242860",
     "0.1039860419798822221154714575090368994840",
     "0.0206135459281066663413310027788637783218",
     "0.9451669431915822226492252810749635131749",
     "0.1175136814952022219019699280826662540077",
     "-0.5307519548082725935685995842560012576273",
     "0.2350273629904044438039398561653325080154"],
]
write("order8.json", tableau_json(8, o8_c, o8_b, o8_A))

# Published optimized eighth-order table.
B1 = "4.99999999999999999999999999999998459e-02"
C2 = "1.72673164646011428100853771876570835e-01"
C5 = "8.27326835353988571899146228123427239e-01"
B5 = "6.80555555555555555555555555555555384e-02"
B6 = "1.18518518518518518518518518518518924e-01"
B7 = "1.36111111111111111111111111111111077e-01"
A51o = "3.47204183213234285871143980803053631e-01"
A53o = "-3.12145260157328254177398323610416044e-01"
A54o = "7.92267912298082540205400570930791192e-01"
A61o = "9.31660703052918236121968330991439771e-03"
A63o = "3.67400047375727443168913762088028958e-01"
A64o = "1.235332538184833542594040221909992e-01"
opt_c = [0, C2, C2, F(1, 2), C5, F(1, 2), C2, C5, F(1, 2), C2, C5, F(1, 2), C5, 1]
opt_b = [B1, 0, 0, 0, B5, B6, B7, B5, B6, B7, B5, B6, B5, B1]
opt_A = [
    [],
    [C2],
    ["8.63365823230057140504268859382852733e-02",
     "8.63365823230057140504268859382855621e-02"],
    ["-2.23910980934740000411752949607999604e-01",
     "-1.94610058394290906661483271413916266e-01",
     "9.18521039329030907073236221021915678e-01"],
    [A51o, 0, A53o, A54o],
    [A61o, 0, A63o, A64o, "-2.4990822473997978953746758894255559e-04"],
    ["-1.33173675734999488712059654478026333e-02", 0,
     "2.74707153333044796263479247308849614e-01",
     "1.08626203179506537330664071859581443e-01",
     "3.61466481093477826918414849170989833e-02",
     "-2.33489472402387739313925066761157727e-01"],
    ["-7.55898263925417143327717656694715823e-01", 0,
     "9.36435780471984762532194970830611803e-01",
     "-2.37680373689424762061620171279259544",
     "4.44444444444444444444444444444443075e-01",
     "1.69826838634079492188978676705958720",
     "8.8088022491642920697663941527611491e-01"],
    ["7.51167859389416352775606333800818414e-02", 0,
     "-7.34800094751454886337827524175789826e-01",
     "-2.47066507636966708518808044382103171e-01",
     "-5.53372058757747637507729438926114042e-02",
     "4.58333333333333333333333333333329225e-01",
     "9.75177549969128334053900995147236087e-01",
     "2.85761390227930559426135505898599439e-02"],
    ["1.56174510430642806014063108304982221e-01", 0,
     "-2.74707153333044796263479247308898725e-01",
     "-1.08626203179506537330664071859481295e-01",
     "-2.86037726718601566106090287612639699e-02",
     "2.02167356316777136522005280486935188e-01",
     "2.22222222222222222222222222222199967e-01",
     "-3.53854345125778512510771934924967468e-03",
     "7.58474831203853867242322814134885734e-03"],
    [A51o, 0, A53o, A54o,
     "-6.76097970480980249082804772955769433e-02",
     "-7.14592594770649369099442123190306199e-01",
     "6.24290520314656508354796647220625627e-01",
     "6.76097970480980249082804772955769433e-02",
     "7.14592594770649369099442123190306199e-01",
     "-6.24290520314656508354796647220625627e-01"],
    [A61o, 0, A63o, A64o,
     "2.48471152903513119873851615240594623e-02",
     "-9.38801470944387180938011431937732155e-02",
     "-9.09870180529829167267139718178278317e-01",
     "-1.81383613151035491089021755340167436e-02",
     "9.38801470944387180938011431937732155e-02",
     "9.09870180529829167267139718178278317e-01",
     "-6.95866219998774266802045357898527425e-03"],
    ["3.47204183213234285871143980803059794e-01", 0, A53o, A54o,
     "-1.21427404273258106125581474520309672e-01",
     "-1.26068851101560163337012758571184525", 0, 0, 0, 0,
     "1.21427404273258106125581474520309672e-01",
     "1.26068851101560163337012758571184525"],
    ["1.15059735858928208403907271827790529e-32", 0,
     "3.4074855701829383452570595988155705e-31",
     "2.67509725499625842147317014859493508e-31",
     "-6.02784742532391271376259265855368533e-02",
     "7.83607001949023514488261749442154439e-01",
     "-5.56278054302693333760336392186287998e-01",
     "1.27894219614764308765368812757314217e-01",
     "-3.06328249185286986974399429642385722e-02",
     "9.4516694319158222264922528107480591e-01",
     "8.62457805369592634572061465517691453e-02",
     "-5.30751954808272593568599584255938345e-01",
     "2.3502736299040444380393985616533733e-01"],
]
write("order8_optimized.json", tableau_json(8, opt_c, opt_b, opt_A))
