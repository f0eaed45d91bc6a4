package sys

func Call(n int) uintptr {
	var r uintptr
	r = uintptr(n)
	return r
}
