#!/usr/bin/env python3
# Reference values for the lattice-law tests, computed with mpmath from
# closed forms (Hurwitz zeta, Beta integrals, harmonic numbers) rather
# than the Euler-Maclaurin machinery the library uses.
import mpmath as mp

mp.mp.dps = 40


def p17(x):
    return mp.nstr(mp.mpf(x), 22, strip_zeros=False)


print("== pareto_zeta beta=2.5 L=1 (K_cap 10000) ==")
z35 = mp.zeta(mp.mpf("3.5"))
C = 1 / z35
mu = mp.zeta(mp.mpf("2.5")) / z35
print("C     ", p17(C))
print("mu    ", p17(mu))
# tail(x) = P(xi > x) = zetaH(3.5, floor(x)+1) / zeta(3.5)
print("tail(100)     ", p17(mp.zeta(mp.mpf("3.5"), 101) / z35))
print("tail(50000.5) ", p17(mp.zeta(mp.mpf("3.5"), 50001) / z35))
# sigma2(x): atoms k in [1, floor(mu+x)]
def pareto_sigma2(x):
    M = int(mp.floor(mu + x))
    s15 = mp.zeta(mp.mpf("1.5")) - mp.zeta(mp.mpf("1.5"), M + 1)
    s25 = mp.zeta(mp.mpf("2.5")) - mp.zeta(mp.mpf("2.5"), M + 1)
    s35p = z35 - mp.zeta(mp.mpf("3.5"), M + 1)
    return C * (s15 - 2 * mu * s25 + mu * mu * s35p)

s2_1000 = pareto_sigma2(1000)
print("sigma2(1000)  ", p17(s2_1000))
# sigma_bar2(1000) = sigma2 + x^2 * (tail(mu+1000) + 0)
tail_c = mp.zeta(mp.mpf("3.5"), int(mp.floor(mu + 1000)) + 1) / z35
print("sigma_bar2(1000)", p17(s2_1000 + mp.mpf(1000) ** 2 * tail_c))
# q(500) = x^2 tail(500) / sigma2(500)
q500 = mp.mpf(500) ** 2 * (mp.zeta(mp.mpf("3.5"), 501) / z35) / pareto_sigma2(500)
print("q_of(500)     ", p17(q500))
# E[|xi-mu| 1{|xi-mu|>300}]: right part only, k >= floor(mu+300)+1
K = int(mp.floor(mu + 300)) + 1
m1 = mp.zeta(mp.mpf("2.5"), K) - mu * mp.zeta(mp.mpf("3.5"), K)
print("absmom_beyond(300)", p17(C * m1))

var25 = mp.zeta(mp.mpf("1.5")) / z35 - mu * mu
print("variance      ", p17(var25))

print()
print("== pareto_zeta beta=2.5 L=log^1.5 (K_cap 10000) ==")
# nsum's Richardson extrapolation silently mis-sums log-modified
# series; use an explicit head plus rigorous Euler-Maclaurin instead
def logpow_total(s):
    head = mp.fsum(mp.log(max(k, mp.e)) ** mp.mpf("1.5") * k ** -s
                   for k in range(1, 20001))
    tail = mp.sumem(lambda x: mp.log(x) ** mp.mpf("1.5") * x ** -s, [20001, mp.inf])
    return head + tail

T35 = logpow_total(mp.mpf("3.5"))
Cl = 1 / T35
mul = logpow_total(mp.mpf("2.5")) / T35
print("C     ", p17(Cl))
print("mu    ", p17(mul))
taill = Cl * mp.sumem(lambda x: mp.log(x) ** mp.mpf("1.5") * x ** mp.mpf("-3.5"),
                      [20001, mp.inf])
print("tail(20000.5)", p17(taill))

print()
print("== zrp rational b=2.5 (K_cap 4000) ==")
b = mp.mpf("2.5")
z_rat = b / (b - 1)  # sum of Beta integrals telescopes
mu_rat = 1 / (b - 2)
print("z     ", p17(z_rat), " (exact b/(b-1))")
print("mu    ", p17(mu_rat), " (exact 1/(b-2))")
# P(xi > x) = (b-1) B(floor(x)+2, b-1)
print("tail(5000.5)", p17((b - 1) * mp.beta(5002, b - 1)))
print("tail(977)   ", p17((b - 1) * mp.beta(979, b - 1)))
# pmf(50) = w(50)/z by the gamma product
w50 = mp.gamma(51) * mp.gamma(1 + b) / mp.gamma(51 + b)
print("pmf(50)     ", p17(w50 / z_rat))
# sigma2(1e4): direct mpf loop with the exact ratio recursion
x = 10000
M = int(mp.floor(mu_rat + x))
w = mp.mpf(1)
s0 = mp.mpf(1)
s1 = mp.mpf(0)
s2 = mp.mpf(0)
for n in range(1, M + 1):
    w = w * n / (n + b)
    s0 += w
    s1 += n * w
    s2 += n * n * w
sig2 = (s2 - 2 * mu_rat * s1 + mu_rat * mu_rat * s0) / z_rat
print("sigma2(1e4) ", p17(sig2))

print()
print("== zrp power b=4 phi=1 (K_cap 4000) ==")
z4 = 1 + mp.zeta(4)
mu4 = mp.zeta(3) / z4
var4 = mp.zeta(2) / z4 - mu4 ** 2
print("z     ", p17(z4))
print("mu    ", p17(mu4))
print("var   ", p17(var4))
print("tail(10000.5)", p17(mp.zeta(4, 10001) / z4))
M = int(mp.floor(mu4 + 100))
s2_ = mp.zeta(2) - mp.zeta(2, M + 1)
s3_ = mp.zeta(3) - mp.zeta(3, M + 1)
s4_ = mp.zeta(4) - mp.zeta(4, M + 1)
sig2_100 = (s2_ - 2 * mu4 * s3_ + mu4 * mu4 * (s4_ + 1)) / z4
print("sigma2(100) ", p17(sig2_100))

print()
print("== zrp power b=3 phi=1 (K_cap 4000) ==")
z3 = 1 + mp.zeta(3)
mu3 = mp.zeta(2) / z3
print("z     ", p17(z3))
print("mu    ", p17(mu3))
print("tail(1000.5)", p17(mp.zeta(3, 1001) / z3))
def zrp3_sigma2(x):
    M = int(mp.floor(mu3 + x))
    h = mp.harmonic(M)
    s2_ = mp.zeta(2) - mp.zeta(2, M + 1)
    s3_ = mp.zeta(3) - mp.zeta(3, M + 1)
    return (h - 2 * mu3 * s2_ + mu3 * mu3 * (s3_ + 1)) / z3

print("sigma2(1e5) ", p17(zrp3_sigma2(100000)))
print("sigma2(1e5)/log(1e5)", p17(zrp3_sigma2(100000) / mp.log(100000)))
q1e6 = mp.mpf(10) ** 12 * (mp.zeta(3, 10 ** 6 + 1) / z3) / zrp3_sigma2(10 ** 6)
print("q_of(1e6)   ", p17(q1e6))
print("q_of(1e6)*2log(1e6)", p17(q1e6 * 2 * mp.log(10 ** 6)))

print()
print("== two_sided beta_r=2.5 beta_l=4(pmf exp), rho=0.7 (K_cap 3000) ==")
# right pmf C k^-3.5, left pmf 0.7 C k^-5 ... careful: beta_l = 4 gives
# pmf exponent 1+4 = 5
zr = mp.zeta(mp.mpf("3.5"))
zl = mp.zeta(5)
C2 = 1 / (zr + mp.mpf("0.7") * zl)
mu2 = C2 * (mp.zeta(mp.mpf("2.5")) - mp.mpf("0.7") * mp.zeta(4))
print("C     ", p17(C2))
print("mu    ", p17(mu2))
print("tail(2000.5)", p17(C2 * mp.zeta(mp.mpf("3.5"), 2001)))
print("cdf(-1500.5)", p17(mp.mpf("0.7") * C2 * mp.zeta(5, 1501)))
t300 = C2 * mp.zeta(mp.mpf("3.5"), int(mp.floor(mu2 + 300)) + 1)
c300 = mp.mpf("0.7") * C2 * mp.zeta(5, int(-mp.floor(mu2 - 300)))
print("abs_tail_centered(300)", p17(t300 + c300))

print()
print("== zrp power b=4 phi=0.9 (K_cap 2000) ==")
phi = mp.mpf("0.9")
z_sub = 1 + mp.polylog(4, phi)
mu_sub = mp.polylog(3, phi) / z_sub
print("z     ", p17(z_sub))
print("mu    ", p17(mu_sub))
# sum_{k>=N} phi^k k^-4 = phi^N lerchphi(phi, 4, N)
t_sub = phi ** 2501 * mp.lerchphi(phi, 4, 2501) / z_sub
print("tail(2500.5)", p17(t_sub))
print("pmf(2200)   ", p17(phi ** 2200 * mp.mpf(2200) ** -4 / z_sub))

print()
print("== oscillating gamma=3.5 (K_cap 10000) ==")
def osc_tail(x):
    x = mp.mpf(x)
    return x ** (-mp.mpf("3.5") + mp.sin(mp.log(mp.log(x))))

print("tail(1000.5)", p17(osc_tail(1000)))
print("tail(123456.5)", p17(osc_tail(123456)))
print("pmf(5000)   ", p17(osc_tail(4999) - osc_tail(5000)))
# mean = 16 + sum_{j>=16} T(j)  (Abel, F(x)=1 below 16)
mean_osc = 16 + mp.nsum(osc_tail, [16, mp.inf])
print("mean        ", p17(mean_osc))
