"""Shared finite-difference gradient checker for loss functions."""


def finite_difference_loss_check(model, loss_fn, h=1e-4, floor=1e-6):
    """Max relative error between analytic and central-difference gradients.

    loss_fn(accumulate=...) must evaluate the batch loss, accumulating
    parameter gradients only when asked. Pairs where both gradients are
    below `floor` are treated as matching zeros.
    """
    model.params.zero_grads()
    loss_fn(accumulate=True)
    worst = 0.0
    for _, p, g in model.params.tensors():
        flat_p = p.ravel()
        flat_g = g.ravel()
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + h
            up = loss_fn(accumulate=False)
            flat_p[i] = orig - h
            down = loss_fn(accumulate=False)
            flat_p[i] = orig
            fd = (up - down) / (2 * h)
            denom = max(abs(fd), abs(flat_g[i]))
            if denom < floor:
                continue
            worst = max(worst, abs(fd - flat_g[i]) / denom)
    return worst
