"""Frozen reference values computed independently of the package.

RAY: U = c sqrt(t) has a straight-line trace. With alpha in (0, 1) solving
c = 2 (1 - 2 alpha) / sqrt(alpha (1 - alpha)) the tip is
gamma_1 = 2 ((1 - alpha) / alpha)^(1/2 - alpha) exp(i pi alpha), and gamma_t = sqrt(t) gamma_1,
so theta_t = gamma_t^2 = t gamma_1^2 and theta' = gamma_1^2. The numbers below were
obtained with mpmath (30 digits, findroot on the alpha equation) and rounded to 17.
"""

RAY = {
    # c: (alpha, gamma_1, gamma_1^2)
    0.5: (0.43798263270539577, 0.39324038160513052 + 1.9927390698543138j,
          -3.8163710027988871 + 1.5672509445379264j),
    1.0: (0.37873218748183351, 0.78964983097503035 + 1.9714501867092849j,
          -3.2630689831171804 + 3.1135106134213577j),
    1.9: (0.28547159271585618, 1.5196882397625142 + 1.9026510300156556j,
          -1.3106285959471463 + 5.7828727893736526j),
}

# int_0^1 cos(x) d(x^{3/2}) by mpmath quad
STIELTJES_COS_X32 = 0.79680402462677311
