class Context:
    def __init__(self, args):
        if type(args) != dict:
            args_dict = vars(args)
        else:
            args_dict = args
        for key in args_dict:
            super(Context, self).__setattr__(key, args_dict[key])

    def __delattr__(self, item):
        raise TypeError('Deleting attribute is not allowed. Context is immutable')

    def __setattr__(self, key, value):
        raise TypeError('Resetting attribute is not allowed. Context is immutable.')

    def __getstate__(self):
        return dict(vars(self))

    def __setstate__(self, state):
        for key in state:
            super(Context, self).__setattr__(key, state[key])

    def updated(self, **overrides):
        """Return a new Context with some attributes replaced"""
        args_dict = dict(vars(self))
        args_dict.update(overrides)
        return Context(args_dict)
