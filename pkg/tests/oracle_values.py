"""Reference values computed once with mpmath at 40 digits and frozen here."""

SHARE = 3.329105741375897368585829556745154749897          # 1/2 log2(101)
SPREAD_05 = 1.547487795302493333396706768650139689065      # log2(1 + 0.5/0.26)
SPREAD_06 = 1.38565369249774951700883217661571161149
SPREAD_03 = 2.044394119358453437653101990673609467463
G_STAR = 0.09049875621120890270219264912759576186945
PI0 = 5.672425341971495589707804954758220862771            # log2(51)
G12_TILDE_K2 = 0.3133333333333333
G12_TILDE_K05 = 2.39421356237309504880168872420969807857
D_K2_G06 = 0.6838891353883003516368433253953261983046
D_K05_G3 = 0.9700482487666263915470450836789477229966
LAMBDA_05 = 0.2397033910267414110479936861985312900141
T_STAR_02 = 4.235814852541126058542617524556377042157
BOTH_SPREAD_UNIT = 0.9857861407802991474638541587320886370238
GAMMA_02_T2 = 0.1155563264037735442519379380346202414506
D_CUBED = 0.3198579231983776004504966884888278654444
G21_HAT_K05 = 0.19320532683773709679108307871393766988
H_A03_G08 = 2.675446809637311769799671490147182416151
